import { App } from '../src/app';
import { Client } from '../src/api';
import type { MockBackend } from './mock_backend';

export function makeApp(backend: MockBackend): {
  app: App;
  root: HTMLElement;
} {
  const root = document.createElement('div');
  document.body.appendChild(root);
  const app = new App(new Client('http://backend.test', backend.fetch), root);
  return { app, root };
}

/* Two macrotask turns: enough for any chained mutation + follow-up GET. */
export async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export function click(root: HTMLElement, selector: string): void {
  const el = root.querySelector<HTMLElement>(selector);
  if (!el) throw new Error(`no element matches ${selector}`);
  el.click();
}

export function typeInto(
  root: HTMLElement,
  selector: string,
  value: string,
): void {
  const box = root.querySelector<HTMLTextAreaElement>(selector);
  if (!box) throw new Error(`no element matches ${selector}`);
  box.value = value;
  box.dispatchEvent(new Event('input'));
}
