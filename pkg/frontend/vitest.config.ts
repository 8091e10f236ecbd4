import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // The round-trip suite boots the real HTTP service in a child
    // process, so hooks get generous budgets.
    hookTimeout: 120_000,
    testTimeout: 60_000,
  },
});
