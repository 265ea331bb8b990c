// Shared test plumbing: spawn the real backend, poll the DOM.

import { spawn, ChildProcess } from 'node:child_process';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export interface Backend {
  baseUrl: string;
  stop: () => void;
}

const MOCK_FIXTURES = {
  by_key: {
    'NER/1': '["ORG"]',
    'NER/2/ORG': '["Google"]',
  },
};

export async function startBackend(port: number): Promise<Backend> {
  const dir = mkdtempSync(join(tmpdir(), 'annograph-ui-'));
  const fixtures = join(dir, 'fixtures.json');
  writeFileSync(fixtures, JSON.stringify(MOCK_FIXTURES));
  const proc: ChildProcess = spawn(
    'python3',
    ['-m', 'annograph.cli', 'serve', '--port', String(port), '--mock-gen',
     '--mock-fixtures', fixtures],
    { stdio: 'ignore' },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      await fetch(`${baseUrl}/projects`);
      break;
    } catch {
      if (Date.now() > deadline) {
        proc.kill();
        throw new Error('backend did not come up');
      }
      await sleep(200);
    }
  }
  return { baseUrl, stop: () => proc.kill() };
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function until(probe: () => boolean, label: string, timeout = 15_000): Promise<void> {
  const started = Date.now();
  while (!probe()) {
    if (Date.now() - started > timeout) throw new Error(`timed out waiting for ${label}`);
    await sleep(30);
  }
}

export function q<T extends Element>(selector: string): T {
  const element = document.querySelector<T>(selector);
  if (!element) throw new Error(`missing element ${selector}`);
  return element;
}

export function setInput(selector: string, value: string): void {
  const input = q<HTMLInputElement | HTMLTextAreaElement>(selector);
  input.value = value;
  input.dispatchEvent(new Event('input', { bubbles: true }));
}

export function click(selector: string): void {
  q<HTMLElement>(selector).click();
}

export function mouseSpan(startSelector: string, endSelector: string): void {
  q<HTMLElement>(startSelector).dispatchEvent(
    new MouseEvent('mousedown', { bubbles: true }),
  );
  q<HTMLElement>(endSelector).dispatchEvent(new MouseEvent('mouseup', { bubbles: true }));
}
