// Application shell: login, project feed, wizard, and the project workspace
// (annotate / dashboard / graph / download tabs).

import { ApiClient, ApiError } from './api';
import { AnnotationCanvas } from './canvas';
import { Store } from './store';
import type { ProjectDetail, TextSummary } from './types';
import { renderDashboard, renderDownload, renderGraph } from './views';
import { ProjectWizard } from './wizard';

type Screen = 'login' | 'projects' | 'wizard' | 'workspace';

interface AppState {
  screen: Screen;
  projectId: string | null;
  tab: 'annotate' | 'dashboard' | 'graph' | 'download';
  clusterFilter: number | null;
}

export class App {
  store = new Store<AppState>({
    screen: 'login',
    projectId: null,
    tab: 'annotate',
    clusterFilter: null,
  });
  canvas: AnnotationCanvas | null = null;
  private project: ProjectDetail | null = null;
  private texts: TextSummary[] = [];
  private currentTextId: string | null = null;

  constructor(private root: HTMLElement, public api: ApiClient) {
    this.store.subscribe(() => void this.render());
  }

  start(): void {
    void this.render();
  }

  /** Resolves once no API request is in flight (test hook). */
  async idle(timeoutMs = 8000): Promise<void> {
    const started = Date.now();
    for (;;) {
      if (this.api.pending === 0) {
        await new Promise((resolve) => setTimeout(resolve, 25));
        if (this.api.pending === 0) return;
      }
      if (Date.now() - started > timeoutMs) throw new Error('API never went idle');
      await new Promise((resolve) => setTimeout(resolve, 25));
    }
  }

  private async render(): Promise<void> {
    const state = this.store.get();
    switch (state.screen) {
      case 'login':
        this.renderLogin();
        break;
      case 'projects':
        await this.renderProjects();
        break;
      case 'wizard':
        this.renderWizard();
        break;
      case 'workspace':
        await this.renderWorkspace();
        break;
    }
  }

  private renderLogin(): void {
    this.root.innerHTML = `
      <section class="login">
        <h1>annograph</h1>
        <label>name <input class="login-name"></label>
        <label>password <input class="login-password" type="password"></label>
        <button class="login-register">register</button>
        <button class="login-submit">log in</button>
        <p class="login-error"></p>
      </section>
    `;
    const name = () => (this.root.querySelector('.login-name') as HTMLInputElement).value;
    const password = () =>
      (this.root.querySelector('.login-password') as HTMLInputElement).value;
    const errorBox = this.root.querySelector('.login-error') as HTMLElement;
    const attempt = async (register: boolean) => {
      try {
        if (register) await this.api.register(name(), password());
        await this.api.login(name(), password());
        this.store.set({ screen: 'projects' });
      } catch (error) {
        errorBox.textContent = error instanceof ApiError ? String(error.detail) : String(error);
      }
    };
    (this.root.querySelector('.login-register') as HTMLButtonElement).onclick = () =>
      void attempt(true);
    (this.root.querySelector('.login-submit') as HTMLButtonElement).onclick = () =>
      void attempt(false);
  }

  private async renderProjects(): Promise<void> {
    const { projects } = await this.api.listProjects();
    this.root.innerHTML = `
      <section class="projects">
        <h1>projects</h1>
        <ul class="project-feed"></ul>
        <button class="project-new">new project</button>
      </section>
    `;
    const feed = this.root.querySelector('.project-feed') as HTMLElement;
    for (const project of projects) {
      const item = document.createElement('li');
      const link = document.createElement('button');
      link.className = 'project-open';
      link.dataset.projectId = project.project_id;
      link.textContent = `${project.name} (${project.task})`;
      link.onclick = () =>
        this.store.set({ screen: 'workspace', projectId: project.project_id, tab: 'annotate' });
      item.appendChild(link);
      feed.appendChild(item);
    }
    (this.root.querySelector('.project-new') as HTMLButtonElement).onclick = () =>
      this.store.set({ screen: 'wizard' });
  }

  private renderWizard(): void {
    this.root.innerHTML = '<section class="wizard"></section>';
    const wizard = new ProjectWizard(
      this.root.querySelector('.wizard') as HTMLElement,
      this.api,
      (projectId) => this.store.set({ screen: 'workspace', projectId, tab: 'annotate' }),
    );
    wizard.render();
  }

  private async renderWorkspace(): Promise<void> {
    const state = this.store.get();
    if (!state.projectId) return;
    this.project = await this.api.getProject(state.projectId);
    this.texts = (
      await this.api.listTexts(state.projectId, state.clusterFilter ?? undefined)
    ).texts;

    this.root.innerHTML = `
      <header class="workspace-header">
        <button class="back-to-projects">← projects</button>
        <h1>${this.project.name} <small>(${this.project.task})</small></h1>
        <nav class="tabs">
          ${(['annotate', 'dashboard', 'graph', 'download'] as const)
            .map(
              (tab) =>
                `<button class="tab ${tab === state.tab ? 'tab--active' : ''}" data-tab="${tab}">${tab}</button>`,
            )
            .join('')}
        </nav>
      </header>
      <main class="workspace-main"></main>
    `;
    (this.root.querySelector('.back-to-projects') as HTMLButtonElement).onclick = () =>
      this.store.set({ screen: 'projects', projectId: null });
    for (const button of this.root.querySelectorAll<HTMLButtonElement>('.tab')) {
      button.onclick = () =>
        this.store.set({ tab: button.dataset.tab as AppState['tab'] });
    }

    const main = this.root.querySelector('.workspace-main') as HTMLElement;
    if (state.tab === 'dashboard') {
      await renderDashboard(main, this.api, state.projectId);
      return;
    }
    if (state.tab === 'graph') {
      await renderGraph(main, this.api, state.projectId);
      return;
    }
    if (state.tab === 'download') {
      renderDownload(main, this.api, state.projectId);
      return;
    }
    await this.renderAnnotate(main);
  }

  private async renderAnnotate(main: HTMLElement): Promise<void> {
    const state = this.store.get();
    const project = this.project!;
    main.innerHTML = `
      <div class="annotate-layout">
        <aside class="text-pane">
          <div class="cluster-pane"></div>
          <ul class="text-list"></ul>
        </aside>
        <section class="canvas-root"></section>
      </div>
    `;

    if (project.clustering) {
      const clusterPane = main.querySelector('.cluster-pane') as HTMLElement;
      const counts = await this.api.dashboard(project.project_id);
      const clusterIds = Object.keys(counts.clusters).sort();
      clusterPane.innerHTML = '<span>clusters:</span>';
      const allButton = document.createElement('button');
      allButton.className = 'cluster-filter';
      allButton.textContent = 'all';
      allButton.onclick = () => this.store.set({ clusterFilter: null });
      clusterPane.appendChild(allButton);
      for (const clusterId of clusterIds) {
        const button = document.createElement('button');
        button.className = 'cluster-filter';
        button.dataset.cluster = clusterId;
        button.textContent = `#${clusterId} (${counts.clusters[clusterId]})`;
        button.onclick = () => this.store.set({ clusterFilter: Number(clusterId) });
        clusterPane.appendChild(button);
      }
    }

    const list = main.querySelector('.text-list') as HTMLElement;
    for (const text of this.texts) {
      const item = document.createElement('li');
      const open = document.createElement('button');
      open.className = 'text-open';
      open.dataset.textId = text.text_id;
      open.textContent =
        `${text.saved ? '✓ ' : ''}${text.text.slice(0, 48)}` +
        (text.markup_count ? ` [${text.markup_count}]` : '');
      open.onclick = () => void this.openText(text.text_id);
      item.appendChild(open);
      list.appendChild(item);
    }

    const canvasRoot = main.querySelector('.canvas-root') as HTMLElement;
    this.canvas = new AnnotationCanvas(canvasRoot, this.api, project.ontology, {
      onMutation: () => void this.refreshTextList(),
    });
    const preferred =
      (state.clusterFilter === null && this.currentTextId) || null;
    const initial = this.texts.find((t) => t.text_id === preferred) ?? this.texts[0];
    if (initial) {
      this.currentTextId = initial.text_id;
      await this.canvas.load(initial.text_id);
    } else {
      canvasRoot.innerHTML = '<p class="canvas-empty">No documents in this view.</p>';
    }
  }

  private async openText(textId: string): Promise<void> {
    this.currentTextId = textId;
    if (this.canvas) await this.canvas.load(textId);
  }

  private async refreshTextList(): Promise<void> {
    const state = this.store.get();
    if (!state.projectId) return;
    this.texts = (
      await this.api.listTexts(state.projectId, state.clusterFilter ?? undefined)
    ).texts;
    const list = this.root.querySelector('.text-list');
    if (!list) return;
    list.innerHTML = '';
    for (const text of this.texts) {
      const item = document.createElement('li');
      const open = document.createElement('button');
      open.className = 'text-open';
      open.dataset.textId = text.text_id;
      open.textContent =
        `${text.saved ? '✓ ' : ''}${text.text.slice(0, 48)}` +
        (text.markup_count ? ` [${text.markup_count}]` : '');
      open.onclick = () => void this.openText(text.text_id);
      item.appendChild(open);
      list.appendChild(item);
    }
  }
}
