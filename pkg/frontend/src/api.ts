// REST client; the UI never touches any state the server does not own.

import type {
  AutolabelResponse,
  CreateProjectResponse,
  DashboardCounts,
  GraphViewJson,
  MarkupJson,
  ProjectDetail,
  ProjectInfo,
  PropagateResponse,
  TextBlock,
  TextSummary,
  TransitionResponse,
  WizardPayload,
} from './types';

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(typeof detail === 'string' ? detail : JSON.stringify(detail));
  }
}

interface MarkupDraftBody {
  is_entity: boolean;
  name: string;
  state?: string;
  start?: number;
  end?: number;
  source?: string;
  target?: string;
  version?: number;
}

export class ApiClient {
  token: string | null = null;
  private pendingRequests = 0;

  constructor(public baseUrl: string) {}

  /** Number of requests currently in flight (used by tests to await quiescence). */
  get pending(): number {
    return this.pendingRequests;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    this.pendingRequests += 1;
    try {
      const response = await fetch(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
      const raw = await response.text();
      let payload: unknown = null;
      try {
        payload = raw ? JSON.parse(raw) : null;
      } catch {
        payload = raw;
      }
      if (!response.ok) {
        const detail = (payload as { detail?: unknown } | null)?.detail ?? payload;
        throw new ApiError(response.status, detail);
      }
      return payload as T;
    } finally {
      this.pendingRequests -= 1;
    }
  }

  async register(name: string, password: string): Promise<void> {
    await this.request('POST', '/auth/register', { name, password });
  }

  async login(name: string, password: string): Promise<void> {
    const result = await this.request<{ token: string }>('POST', '/auth/login', {
      name,
      password,
    });
    this.token = result.token;
  }

  createProject(payload: WizardPayload): Promise<CreateProjectResponse> {
    return this.request('POST', '/projects', payload);
  }

  listProjects(): Promise<{ projects: ProjectInfo[] }> {
    return this.request('GET', '/projects');
  }

  getProject(projectId: string): Promise<ProjectDetail> {
    return this.request('GET', `/projects/${projectId}`);
  }

  listTexts(projectId: string, clusterId?: number): Promise<{ texts: TextSummary[] }> {
    const query = clusterId === undefined ? '' : `?cluster_id=${clusterId}`;
    return this.request('GET', `/projects/${projectId}/texts${query}`);
  }

  getText(textId: string): Promise<TextBlock> {
    return this.request('GET', `/texts/${textId}`);
  }

  addMarkup(
    textId: string,
    draft: MarkupDraftBody,
  ): Promise<{ markup: MarkupJson; version: number }> {
    return this.request('POST', `/texts/${textId}/markups`, draft);
  }

  transition(markupId: string, action: string, version?: number): Promise<TransitionResponse> {
    return this.request('POST', `/markups/${markupId}/transition`, { action, version });
  }

  propagate(markupId: string, scope: string): Promise<PropagateResponse> {
    return this.request('POST', `/markups/${markupId}/propagate`, { scope });
  }

  autolabel(textId: string): Promise<AutolabelResponse> {
    return this.request('POST', `/texts/${textId}/autolabel`);
  }

  saveText(textId: string, saved: boolean): Promise<{ saved: boolean; version: number }> {
    return this.request('POST', `/texts/${textId}/save`, { saved });
  }

  dashboard(projectId: string): Promise<DashboardCounts> {
    return this.request('GET', `/projects/${projectId}/dashboard`);
  }

  graph(projectId: string, quality: string): Promise<GraphViewJson> {
    return this.request('GET', `/projects/${projectId}/graph?quality=${quality}`);
  }

  async exportProject(projectId: string, quality: string, savedOnly: boolean): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    this.pendingRequests += 1;
    try {
      const response = await fetch(
        `${this.baseUrl}/projects/${projectId}/export?quality=${quality}&saved_only=${savedOnly}`,
        { headers },
      );
      if (!response.ok) throw new ApiError(response.status, await response.text());
      return response.text();
    } finally {
      this.pendingRequests -= 1;
    }
  }
}
