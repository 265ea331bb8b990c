// Dashboard, graph, and download views; all pure renderings of server replies.

import { ApiClient } from './api';
import type { DashboardCounts, GraphViewJson } from './types';

export async function renderDashboard(
  root: HTMLElement,
  api: ApiClient,
  projectId: string,
): Promise<DashboardCounts> {
  const counts = await api.dashboard(projectId);
  const progress = counts.texts ? Math.round((100 * counts.saved) / counts.texts) : 0;
  root.innerHTML = `
    <table class="dashboard-table">
      <tr><th>texts</th><td data-count="texts">${counts.texts}</td></tr>
      <tr><th>saved</th><td data-count="saved">${counts.saved}</td></tr>
      <tr><th>entities</th><td data-count="entities">${counts.entities}</td></tr>
      <tr><th>relations</th><td data-count="relations">${counts.relations}</td></tr>
      <tr><th>triples</th><td data-count="triples">${counts.triples}</td></tr>
      <tr><th>accepted</th><td data-count="accepted">${counts.accepted}</td></tr>
      <tr><th>suggested</th><td data-count="suggested">${counts.suggested}</td></tr>
    </table>
    <div class="progress"><div class="progress-bar" style="width:${progress}%"></div></div>
    <p class="progress-caption">${counts.saved}/${counts.texts} documents saved</p>
  `;
  return counts;
}

export async function renderGraph(
  root: HTMLElement,
  api: ApiClient,
  projectId: string,
  quality = 'all',
): Promise<GraphViewJson> {
  const graph = await api.graph(projectId, quality);
  const size = 420;
  const radius = size / 2 - 60;
  const center = size / 2;
  const positions = new Map<string, { x: number; y: number }>();
  graph.nodes.forEach((node, index) => {
    const angle = (2 * Math.PI * index) / Math.max(graph.nodes.length, 1);
    positions.set(node.id, {
      x: center + radius * Math.cos(angle),
      y: center + radius * Math.sin(angle),
    });
  });

  const edges = graph.edges
    .map((edge) => {
      const a = positions.get(edge.source)!;
      const b = positions.get(edge.target)!;
      return `
        <g class="graph-edge" data-quality="${edge.quality}" data-name="${edge.name}">
          <line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"></line>
          <text x="${(a.x + b.x) / 2}" y="${(a.y + b.y) / 2}">${edge.name}</text>
        </g>`;
    })
    .join('');
  const nodes = graph.nodes
    .map((node) => {
      const p = positions.get(node.id)!;
      return `
        <g class="graph-node" data-quality="${node.quality}" data-type="${node.type}">
          <circle cx="${p.x}" cy="${p.y}" r="16"></circle>
          <text x="${p.x}" y="${p.y - 22}">${node.surface} (${node.type})</text>
        </g>`;
    })
    .join('');

  root.innerHTML = `
    <label>quality
      <select class="graph-quality">
        ${['all', 'accepted', 'suggested']
          .map((q) => `<option ${q === quality ? 'selected' : ''}>${q}</option>`)
          .join('')}
      </select>
    </label>
    <svg class="graph-svg" viewBox="0 0 ${size} ${size}">${edges}${nodes}</svg>
    <p class="graph-caption">${graph.nodes.length} node(s), ${graph.edges.length} edge(s)</p>
  `;
  (root.querySelector('.graph-quality') as HTMLSelectElement).onchange = (event) => {
    void renderGraph(root, api, projectId, (event.target as HTMLSelectElement).value);
  };
  return graph;
}

export function renderDownload(root: HTMLElement, api: ApiClient, projectId: string): void {
  root.innerHTML = `
    <label>quality
      <select class="download-quality">
        <option>all</option><option>accepted</option><option>suggested</option>
      </select>
    </label>
    <label><input type="checkbox" class="download-saved-only"> saved documents only</label>
    <button class="download-fetch">fetch export</button>
    <p class="download-summary"></p>
    <a class="download-link" hidden>download JSON</a>
  `;
  (root.querySelector('.download-fetch') as HTMLButtonElement).onclick = async () => {
    const quality = (root.querySelector('.download-quality') as HTMLSelectElement).value;
    const savedOnly = (root.querySelector('.download-saved-only') as HTMLInputElement).checked;
    const raw = await api.exportProject(projectId, quality, savedOnly);
    const payload = JSON.parse(raw) as { texts: { markups: unknown[] }[] };
    const markupCount = payload.texts.reduce((sum, t) => sum + t.markups.length, 0);
    const summary = root.querySelector('.download-summary') as HTMLElement;
    summary.textContent = `${payload.texts.length} text(s), ${markupCount} markup(s)`;
    summary.dataset.markupCount = String(markupCount);
    summary.dataset.textCount = String(payload.texts.length);
    const link = root.querySelector('.download-link') as HTMLAnchorElement;
    if (typeof URL.createObjectURL === 'function') {
      link.href = URL.createObjectURL(new Blob([raw], { type: 'application/json' }));
    }
    link.download = `project-${projectId}-${quality}.json`;
    link.hidden = false;
  };
}
