import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    // the round-trip suite spawns a real service subprocess
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
