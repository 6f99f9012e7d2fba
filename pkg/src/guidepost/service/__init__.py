from .app import ApiError, ServiceConfig, create_app

__all__ = ["ApiError", "ServiceConfig", "create_app"]
