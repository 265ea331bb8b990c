// End-to-end UI loop against the real server with the mock generation client:
// wizard -> upload 3 documents -> auto-label -> accept -> propagate ->
// accepted-only download matching the dashboard.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { App } from '../src/app';
import { Backend, click, mouseSpan, q, setInput, startBackend, until } from './helpers';

const PORT = 8791;

let backend: Backend;
let app: App;

beforeAll(async () => {
  backend = await startBackend(PORT);
  document.body.innerHTML = '<div id="app"></div>';
  app = new App(document.getElementById('app')!, new ApiClient(backend.baseUrl));
  app.start();
});

afterAll(() => {
  backend?.stop();
});

describe('annotation loop in the browser UI', () => {
  it('registers and logs in', async () => {
    await until(() => !!document.querySelector('.login-name'), 'login form');
    setInput('.login-name', 'ui-user');
    setInput('.login-password', 'pw');
    click('.login-register');
    await until(() => !!document.querySelector('.projects'), 'project feed');
  });

  it('creates a project through the wizard with 3 documents', async () => {
    click('.project-new');
    await until(() => !!document.querySelector('.wizard-nav'), 'wizard');

    setInput('.wizard-name', 'ui-loop');
    click('.wizard-next'); // -> Upload
    await until(() => !!document.querySelector('.wizard-texts'), 'upload step');
    setInput(
      '.wizard-texts',
      [
        'James worked for Google in Tokyo.',
        'Google expanded the Berlin office.',
        'google shipped new phones.',
      ].join('\n'),
    );
    click('.wizard-next'); // -> Preprocess
    await until(() => !!document.querySelector('.wizard-lowercase'), 'preprocess step');
    click('.wizard-next'); // -> Scheme
    await until(() => !!document.querySelector('.wizard-preset'), 'scheme step');
    click('.wizard-preset');
    click('.wizard-next'); // -> Preannotation
    await until(() => !!document.querySelector('.wizard-preannotation'), 'preannotation step');
    click('.wizard-next'); // -> Review
    await until(() => !!document.querySelector('.wizard-review'), 'review step');
    expect(q<HTMLElement>('.review-texts').textContent).toBe('3');
    expect(q<HTMLElement>('.review-name').textContent).toBe('ui-loop');

    click('.wizard-create');
    await until(() => !!document.querySelector('.workspace-header'), 'workspace');
    await until(
      () => document.querySelectorAll('.text-open').length === 3,
      'three uploaded documents',
    );
  });

  it('auto-labels the first document into a suggestion', async () => {
    await until(() => !!document.querySelector('.autolabel-btn'), 'canvas toolbar');
    click('.autolabel-btn');
    await until(
      () => !!document.querySelector('.markup-chip[data-state="suggested"]'),
      'suggested markup chip',
    );
    const chip = q<HTMLElement>('.markup-chip[data-state="suggested"]');
    expect(chip.classList.contains('markup--suggested')).toBe(true);
    expect(chip.querySelector('.chip-label')!.textContent).toContain('Google');
    // the highlighted token also reports its state
    const token = q<HTMLElement>('.token[data-state="suggested"]');
    expect(token.textContent).toBe('Google');
  });

  it('accepts the suggestion', async () => {
    click('.markup-chip[data-state="suggested"] [data-action="accept"]');
    await until(
      () => !!document.querySelector('.markup-chip[data-state="accepted"]'),
      'accepted markup chip',
    );
    expect(document.querySelector('.markup-chip[data-state="suggested"]')).toBeNull();
  });

  it('propagates the accepted markup across the project', async () => {
    click('.markup-chip[data-state="accepted"] [data-action="propagate"]');
    await until(
      () => (q<HTMLElement>('.canvas-hint').textContent ?? '').includes('propagated: 2'),
      'propagation summary',
    );
    // the other two documents now show one suggestion each
    const buttons = Array.from(document.querySelectorAll<HTMLElement>('.text-open'));
    const second = buttons.find((b) => b.textContent!.includes('Berlin'))!;
    second.click();
    await until(
      () => !!document.querySelector('.markup-chip[data-state="suggested"]'),
      'propagated suggestion in second document',
    );
  });

  it('shows dashboard counts and a matching accepted-only download', async () => {
    click('.tab[data-tab="dashboard"]');
    await until(() => !!document.querySelector('.dashboard-table'), 'dashboard');
    const accepted = Number(q<HTMLElement>('[data-count="accepted"]').textContent);
    const suggested = Number(q<HTMLElement>('[data-count="suggested"]').textContent);
    expect(accepted).toBe(1);
    expect(suggested).toBe(2);

    click('.tab[data-tab="download"]');
    await until(() => !!document.querySelector('.download-fetch'), 'download page');
    (q<HTMLSelectElement>('.download-quality')).value = 'accepted';
    click('.download-fetch');
    await until(
      () => !!q<HTMLElement>('.download-summary').dataset.markupCount,
      'download summary',
    );
    expect(Number(q<HTMLElement>('.download-summary').dataset.markupCount)).toBe(accepted);
  });

  it('supports manual entity annotation from a span selection', async () => {
    click('.tab[data-tab="annotate"]');
    await until(() => !!document.querySelector('.canvas-text'), 'canvas');
    // first document: select "James" (token 0) and label it PER
    const buttons = Array.from(document.querySelectorAll<HTMLElement>('.text-open'));
    buttons.find((b) => b.textContent!.includes('James'))!.click();
    await until(
      () => (q<HTMLElement>('.canvas-text').textContent ?? '').includes('James'),
      'first document loaded',
    );
    mouseSpan('.token[data-index="0"]', '.token[data-index="0"]');
    await until(() => !!document.querySelector('.token--selected'), 'span selected');
    click('.type-btn[data-type="PER"]');
    await until(
      () =>
        !!Array.from(document.querySelectorAll('.markup-chip[data-state="accepted"]')).find((c) =>
          c.textContent!.includes('James'),
        ),
      'manual accepted markup',
    );
  });

  it('builds relations in relation mode with constraint-aware choices', async () => {
    // switch to relation mode, pick subject (PER James) then object (ORG Google)
    click('.mode-toggle');
    await until(
      () => q<HTMLElement>('.mode-toggle').dataset.mode === 'relation',
      'relation mode',
    );

    const chipLabel = (needle: string) => {
      const chips = Array.from(document.querySelectorAll<HTMLElement>('.markup-chip'));
      return chips
        .find((c) => c.textContent!.includes(needle))!
        .querySelector<HTMLElement>('.chip-label')!;
    };
    chipLabel('James').click();
    await until(
      () => (q<HTMLElement>('.canvas-hint').textContent ?? '').includes('object'),
      'subject picked',
    );
    chipLabel('Google').click();
    // PER/ORG do not satisfy person-company@[Person, Organization] in the
    // NER preset (no relations declared), so the palette explains that
    await until(
      () => (q<HTMLElement>('.type-palette').textContent ?? '').includes('no relation allowed'),
      'constraint hint',
    );
  });
});
