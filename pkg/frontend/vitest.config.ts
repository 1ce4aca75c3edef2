import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // same origin as the contract suite's backend so its real fetches
    // are not treated as cross-origin
    environmentOptions: { happyDOM: { url: "http://127.0.0.1:8761" } },
    include: ["tests/**/*.test.ts"],
    // the contract suite boots a real backend process
    testTimeout: 120_000,
    hookTimeout: 120_000,
    pool: "forks",
  },
});
