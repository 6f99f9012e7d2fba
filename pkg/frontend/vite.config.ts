import { defineConfig } from "vitest/config";

export default defineConfig({
  // Relative asset paths: the service mounts the built UI under /ui.
  base: "./",
  test: {
    // Each test file boots its own service process; keep them sequential.
    fileParallelism: false,
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
