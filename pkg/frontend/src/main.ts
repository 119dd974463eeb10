/**
 * Browser entry point. The backend base URL comes from a global set by
 * the hosting page, falling back to the local development default.
 */

import { App } from './app';
import { Client } from './api';

declare global {
  interface Window {
    STUDIO_BACKEND_URL?: string;
  }
}

const DEFAULT_BASE_URL = 'http://127.0.0.1:8500';

export function bootstrap(root: HTMLElement): App {
  const baseUrl = window.STUDIO_BACKEND_URL ?? DEFAULT_BASE_URL;
  const app = new App(new Client(baseUrl), root);
  const resume = parseHash(window.location.hash);
  if (resume?.kind === 'session') {
    void app.openSession(resume.id);
  } else if (resume?.kind === 'story') {
    void app.openStoryboard(resume.id);
  } else {
    void app.start();
  }
  return app;
}

export function parseHash(
  hash: string,
): { kind: 'session' | 'story'; id: string } | null {
  const match = /^#(session|story)\/(.+)$/.exec(hash);
  if (!match) return null;
  return { kind: match[1] as 'session' | 'story', id: match[2] };
}

const mount = document.getElementById('app');
if (mount) {
  bootstrap(mount);
}
