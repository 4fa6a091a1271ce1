import { defineConfig } from 'vitest/config';

// `npm run dev` serves the UI and forwards API traffic to an
// `edict serve` process on its default port.
const service = process.env.EDICT_SERVICE ?? 'http://127.0.0.1:8000';

export default defineConfig({
  server: {
    proxy: {
      '/prompts': service,
      '/trajectories': service,
      '/session': { target: service, ws: true },
    },
  },
  test: {
    environment: 'jsdom',
    include: ['test/**/*.test.ts'],
    // the workflow test boots the real annotation service
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
