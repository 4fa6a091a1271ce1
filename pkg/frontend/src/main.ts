/** Browser entry point: wire the app to the service this page came from. */

import { AnnotatorApp } from './app.js';
import { Connection } from './connection.js';
import { SessionClock } from './clock.js';
import { LiveSource, recognitionAvailable } from './sources.js';
import type { PromptJson } from './protocol.js';

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app container');

  // session id rides the fragment so a reload resumes the same session
  const sessionId =
    window.location.hash.slice(1) ||
    Math.random().toString(36).slice(2, 10);
  window.location.hash = sessionId;

  const scheme = window.location.protocol === 'https:' ? 'wss' : 'ws';
  const base = window.location.host;
  const connection = new Connection(
    `${scheme}://${base}/session/${sessionId}`,
    (url) => new WebSocket(url),
  );
  await connection.open();

  const prompts = (await (await fetch('/prompts')).json()) as PromptJson[];
  const clock = new SessionClock();
  const live = recognitionAvailable(window)
    ? () => new LiveSource(window, clock)
    : undefined;

  const app = new AnnotatorApp(root, connection, clock, prompts, live);
  await app.attach();
}

void boot().catch((err) => {
  const root = document.getElementById('app');
  if (root) root.textContent = `failed to start: ${err}`;
});
