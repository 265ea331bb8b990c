// Annotation canvas: token display, entity/relation modes, suggestion review.
//
// Every mutation posts to the server and re-renders from the re-fetched
// document, so the canvas can never drift from state the server would
// reject.  Suggested markups render semitransparent, accepted ones solid,
// and every markup element carries data-state for machine checks.

import { ApiClient, ApiError } from './api';
import type { MarkupJson, OntologyJson, TextBlock } from './types';

export type CanvasMode = 'entity' | 'relation';

export interface CanvasCallbacks {
  onMutation?: () => void;
  notify?: (message: string) => void;
}

function escapeHtml(value: string): string {
  return value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export class AnnotationCanvas {
  mode: CanvasMode = 'entity';
  selection: { start: number; end: number } | null = null;
  subjectId: string | null = null;
  objectId: string | null = null;
  doc: TextBlock | null = null;

  private anchor: number | null = null;
  private lastHint = '';

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private ontology: OntologyJson,
    private callbacks: CanvasCallbacks = {},
  ) {}

  async load(textId: string): Promise<void> {
    this.doc = await this.api.getText(textId);
    this.resetPicks();
    this.render();
  }

  private resetPicks(): void {
    this.selection = null;
    this.subjectId = null;
    this.objectId = null;
    this.anchor = null;
  }

  private async refresh(): Promise<void> {
    if (!this.doc) return;
    this.doc = await this.api.getText(this.doc.text_id);
    this.render();
    this.callbacks.onMutation?.();
  }

  private hint(message: string): void {
    this.lastHint = message;
    const box = this.root.querySelector('.canvas-hint');
    if (box) box.textContent = message;
    this.callbacks.notify?.(message);
  }

  private async guard(work: () => Promise<void>): Promise<void> {
    try {
      await work();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.hint('document changed, reloading');
        await this.refresh();
      } else if (error instanceof ApiError) {
        this.hint(String(error.detail));
      } else {
        throw error;
      }
    }
  }

  toggleMode(): void {
    this.mode = this.mode === 'entity' ? 'relation' : 'entity';
    this.resetPicks();
    this.render();
  }

  private entityMarkups(): MarkupJson[] {
    return (this.doc?.markups ?? []).filter((m) => m.isEntity);
  }

  private coveringMarkup(tokenIndex: number): MarkupJson | null {
    const candidates = this.entityMarkups().filter(
      (m) => m.start! <= tokenIndex && tokenIndex <= m.end!,
    );
    if (!candidates.length) return null;
    const accepted = candidates.find((m) => !m.suggested);
    return accepted ?? candidates[0];
  }

  private typeColor(name: string): string {
    return this.ontology.entityTypes.find((t) => t.name === name)?.color ?? '#cccccc';
  }

  private allowedRelations(subject: MarkupJson, object: MarkupJson): string[] {
    return this.ontology.relationTypes
      .filter(
        (r) => r.subjectTypes.includes(subject.name) && r.objectTypes.includes(object.name),
      )
      .map((r) => r.name);
  }

  // -- interactions ------------------------------------------------------

  private onTokenDown(index: number): void {
    if (this.mode !== 'entity') return;
    this.anchor = index;
  }

  private onTokenUp(index: number): void {
    if (this.mode === 'entity') {
      if (this.anchor === null) this.anchor = index;
      this.selection = {
        start: Math.min(this.anchor, index),
        end: Math.max(this.anchor, index),
      };
      this.anchor = null;
      this.render();
      return;
    }
    const markup = this.coveringMarkup(index);
    if (!markup) {
      this.hint('relation mode: click an annotated span');
      return;
    }
    this.pickRelationEndpoint(markup._id);
  }

  pickRelationEndpoint(markupId: string): void {
    if (this.subjectId === null) {
      this.subjectId = markupId;
      this.hint('subject selected; now click the object');
    } else if (this.objectId === null && markupId !== this.subjectId) {
      this.objectId = markupId;
      this.hint('pick a relation type');
    } else {
      this.subjectId = markupId;
      this.objectId = null;
      this.hint('subject selected; now click the object');
    }
    this.render();
  }

  private async applyEntityType(name: string): Promise<void> {
    const doc = this.doc;
    if (!doc || !this.selection) {
      this.hint('select a span first');
      return;
    }
    const { start, end } = this.selection;
    await this.guard(async () => {
      await this.api.addMarkup(doc.text_id, {
        is_entity: true,
        name,
        start,
        end,
        state: 'accepted',
        version: doc.version,
      });
      this.selection = null;
      await this.refresh();
    });
  }

  private async applyRelationType(name: string): Promise<void> {
    const doc = this.doc;
    if (!doc || !this.subjectId || !this.objectId) return;
    const source = this.subjectId;
    const target = this.objectId;
    await this.guard(async () => {
      await this.api.addMarkup(doc.text_id, {
        is_entity: false,
        name,
        source,
        target,
        state: 'accepted',
        version: doc.version,
      });
      this.subjectId = null;
      this.objectId = null;
      await this.refresh();
    });
  }

  private async runTooltipAction(markupId: string, action: string): Promise<void> {
    const doc = this.doc;
    if (!doc) return;
    await this.guard(async () => {
      if (action === 'propagate') {
        const result = await this.api.propagate(markupId, 'project');
        this.hint(`propagated: ${result.created.length} suggestion(s) across the project`);
      } else {
        await this.api.transition(markupId, action, doc.version);
      }
      await this.refresh();
    });
  }

  async runAutolabel(): Promise<void> {
    const doc = this.doc;
    if (!doc) return;
    await this.guard(async () => {
      const result = await this.api.autolabel(doc.text_id);
      const warned = result.warnings.length ? `; ${result.warnings.length} warning(s)` : '';
      this.hint(`machine suggested ${result.created.length} markup(s)${warned}`);
      await this.refresh();
    });
  }

  private async toggleSaved(): Promise<void> {
    const doc = this.doc;
    if (!doc) return;
    await this.guard(async () => {
      await this.api.saveText(doc.text_id, !doc.saved);
      await this.refresh();
    });
  }

  // -- rendering ----------------------------------------------------------

  render(): void {
    const doc = this.doc;
    if (!doc) {
      this.root.innerHTML = '<p class="canvas-empty">Select a document.</p>';
      return;
    }
    this.root.innerHTML = `
      <div class="canvas-toolbar">
        <button class="mode-toggle" data-mode="${this.mode}">mode: ${this.mode}</button>
        <button class="autolabel-btn">auto-label</button>
        <button class="save-toggle" data-saved="${doc.saved}">
          ${doc.saved ? 'saved ✓' : 'mark saved'}
        </button>
        <span class="doc-version">v${doc.version}</span>
      </div>
      <div class="canvas-text"></div>
      <div class="type-palette"></div>
      <div class="markup-list"></div>
      <p class="canvas-hint">${escapeHtml(this.lastHint)}</p>
    `;

    this.root.querySelector<HTMLButtonElement>('.mode-toggle')!.onclick = () => this.toggleMode();
    this.root.querySelector<HTMLButtonElement>('.autolabel-btn')!.onclick = () =>
      void this.runAutolabel();
    this.root.querySelector<HTMLButtonElement>('.save-toggle')!.onclick = () =>
      void this.toggleSaved();

    this.renderTokens(doc);
    this.renderPalette();
    this.renderMarkupList(doc);
  }

  private renderTokens(doc: TextBlock): void {
    const container = this.root.querySelector<HTMLElement>('.canvas-text')!;
    doc.tokens.forEach((token, index) => {
      const span = document.createElement('span');
      span.className = 'token';
      span.dataset.index = String(index);
      span.textContent = token.text;
      const covering = this.coveringMarkup(index);
      if (covering) {
        const color = this.typeColor(covering.name);
        span.dataset.state = covering.suggested ? 'suggested' : 'accepted';
        span.dataset.type = covering.name;
        span.classList.add(covering.suggested ? 'markup--suggested' : 'markup--accepted');
        // suggested spans stay semitransparent, accepted ones solid
        span.style.backgroundColor = covering.suggested ? `${color}55` : color;
      }
      if (this.selection && this.selection.start <= index && index <= this.selection.end) {
        span.classList.add('token--selected');
      }
      span.addEventListener('mousedown', () => this.onTokenDown(index));
      span.addEventListener('mouseup', () => this.onTokenUp(index));
      container.appendChild(span);
      container.appendChild(document.createTextNode(' '));
    });
  }

  private renderPalette(): void {
    const palette = this.root.querySelector<HTMLElement>('.type-palette')!;
    if (this.mode === 'entity') {
      for (const entityType of this.ontology.entityTypes) {
        const button = document.createElement('button');
        button.className = 'type-btn';
        button.dataset.type = entityType.name;
        button.textContent = entityType.name;
        button.style.borderColor = entityType.color;
        button.onclick = () => void this.applyEntityType(entityType.name);
        palette.appendChild(button);
      }
      return;
    }
    const markups = this.doc?.markups ?? [];
    const subject = markups.find((m) => m._id === this.subjectId);
    const object = markups.find((m) => m._id === this.objectId);
    if (!subject || !object) {
      palette.innerHTML = `<span class="palette-hint">${
        subject ? 'click the object span' : 'click the subject span'
      }</span>`;
      return;
    }
    const allowed = this.allowedRelations(subject, object);
    if (!allowed.length) {
      palette.innerHTML = '<span class="palette-hint">no relation allowed between these types</span>';
      return;
    }
    for (const name of allowed) {
      const button = document.createElement('button');
      button.className = 'relation-btn';
      button.dataset.relation = name;
      button.textContent = name;
      button.onclick = () => void this.applyRelationType(name);
      palette.appendChild(button);
    }
  }

  private renderMarkupList(doc: TextBlock): void {
    const list = this.root.querySelector<HTMLElement>('.markup-list')!;
    const byId = new Map(doc.markups.map((m) => [m._id, m]));
    for (const markup of doc.markups) {
      const state = markup.suggested ? 'suggested' : 'accepted';
      const chip = document.createElement('div');
      chip.className = `markup-chip markup--${state}`;
      chip.dataset.state = state;
      chip.dataset.markupId = markup._id;
      chip.dataset.kind = markup.isEntity ? 'entity' : 'relation';

      const label = document.createElement('span');
      label.className = 'chip-label';
      if (markup.isEntity) {
        label.innerHTML = `${escapeHtml(markup.name)}: “${escapeHtml(markup.entityText ?? '')}”`;
        label.style.backgroundColor = markup.suggested
          ? `${this.typeColor(markup.name)}55`
          : this.typeColor(markup.name);
      } else {
        const source = byId.get(markup.source ?? '');
        const target = byId.get(markup.target ?? '');
        label.innerHTML = `${escapeHtml(source?.entityText ?? '?')} —${escapeHtml(
          markup.name,
        )}→ ${escapeHtml(target?.entityText ?? '?')}`;
      }
      label.onclick = () => {
        if (this.mode === 'relation' && markup.isEntity) this.pickRelationEndpoint(markup._id);
      };
      chip.appendChild(label);

      const actions: [string, string][] = markup.suggested
        ? [
            ['accept', 'apply'],
            ['accept_all', 'apply all'],
            ['delete', 'delete'],
            ['delete_all', 'delete all'],
            ['propagate', 'propagate'],
          ]
        : [
            ['delete', 'delete'],
            ['delete_all', 'delete all'],
            ['propagate', 'propagate'],
          ];
      for (const [action, caption] of actions) {
        const button = document.createElement('button');
        button.className = 'chip-action';
        button.dataset.action = action;
        button.textContent = caption;
        button.onclick = () => void this.runTooltipAction(markup._id, action);
        chip.appendChild(button);
      }
      list.appendChild(chip);
    }
  }
}
