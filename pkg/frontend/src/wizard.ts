// Project creation wizard: Configuration → Upload → Preprocess → Scheme →
// Preannotation → Review → CREATE, each step validated by the server at the end.

import { ApiClient, ApiError } from './api';
import type { WizardPayload } from './types';

const STEP_TITLES = [
  'Configuration',
  'Upload',
  'Preprocess',
  'Scheme',
  'Preannotation',
  'Review',
];

const PRESET_SCHEMES: Record<string, { entities: string; relations: string }> = {
  NER: { entities: 'PER\nLOC\nORG\nMISC', relations: '' },
  RE: {
    entities: 'Person\nOrganization\nLocation',
    relations: 'person-company@[Person, Organization]\nplace-of-birth@[Person, Location]',
  },
  EE: { entities: '_', relations: 'Life:Marry@[Person, Time, Place]' },
};

export class ProjectWizard {
  step = 0;
  draft: WizardPayload = {
    name: '',
    description: '',
    task: 'NER',
    language: 'en',
    model_update: false,
    clustering: false,
    preprocessing: { lowercase: false, remove_chars: [], deduplicate: false },
    entity_lines: [],
    relation_lines: [],
    texts: [],
    texts_raw: '',
    preannotation: '',
  };

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private onCreated: (projectId: string) => void,
  ) {}

  private field(selector: string): HTMLInputElement {
    return this.root.querySelector(selector) as HTMLInputElement;
  }

  private textarea(selector: string): HTMLTextAreaElement {
    return this.root.querySelector(selector) as HTMLTextAreaElement;
  }

  private collectStep(): void {
    const d = this.draft;
    switch (this.step) {
      case 0:
        d.name = this.field('.wizard-name').value;
        d.description = this.field('.wizard-description').value;
        d.task = (this.root.querySelector('.wizard-task') as HTMLSelectElement).value;
        d.language = (this.root.querySelector('.wizard-language') as HTMLSelectElement).value;
        d.model_update = this.field('.wizard-model-update').checked;
        d.clustering = this.field('.wizard-clustering').checked;
        break;
      case 1:
        d.texts_raw = this.textarea('.wizard-texts').value;
        break;
      case 2:
        d.preprocessing.lowercase = this.field('.wizard-lowercase').checked;
        d.preprocessing.deduplicate = this.field('.wizard-dedup').checked;
        d.preprocessing.remove_chars = [...this.field('.wizard-remove-chars').value];
        break;
      case 3:
        d.entity_lines = this.textarea('.wizard-entities')
          .value.split('\n')
          .filter((line) => line.trim());
        d.relation_lines = this.textarea('.wizard-relations')
          .value.split('\n')
          .filter((line) => line.trim());
        break;
      case 4:
        d.preannotation = this.textarea('.wizard-preannotation').value;
        break;
    }
  }

  private next(): void {
    this.collectStep();
    if (this.step < STEP_TITLES.length - 1) {
      this.step += 1;
      this.render();
    }
  }

  private back(): void {
    this.collectStep();
    if (this.step > 0) {
      this.step -= 1;
      this.render();
    }
  }

  private async create(): Promise<void> {
    const errorBox = this.root.querySelector('.wizard-error') as HTMLElement;
    try {
      const created = await this.api.createProject(this.draft);
      this.onCreated(created.project_id);
    } catch (error) {
      if (error instanceof ApiError) {
        errorBox.textContent =
          typeof error.detail === 'string' ? error.detail : JSON.stringify(error.detail);
      } else {
        throw error;
      }
    }
  }

  private stepBody(): string {
    const d = this.draft;
    switch (this.step) {
      case 0:
        return `
          <label>Name <input class="wizard-name" value="${d.name}"></label>
          <label>Description <input class="wizard-description" value="${d.description}"></label>
          <label>Task
            <select class="wizard-task">
              ${['NER', 'RE', 'EE']
                .map((t) => `<option ${t === d.task ? 'selected' : ''}>${t}</option>`)
                .join('')}
            </select>
          </label>
          <label>Language
            <select class="wizard-language">
              <option ${d.language === 'en' ? 'selected' : ''}>en</option>
              <option ${d.language === 'zh' ? 'selected' : ''}>zh</option>
            </select>
          </label>
          <label><input type="checkbox" class="wizard-model-update" ${
            d.model_update ? 'checked' : ''
          }> model update (learn from accepted markups)</label>
          <label><input type="checkbox" class="wizard-clustering" ${
            d.clustering ? 'checked' : ''
          }> cluster documents</label>
        `;
      case 1:
        return `
          <p>One document per line (keyboard input or paste a file).</p>
          <textarea class="wizard-texts" rows="8">${d.texts_raw}</textarea>
        `;
      case 2:
        return `
          <label><input type="checkbox" class="wizard-lowercase" ${
            d.preprocessing.lowercase ? 'checked' : ''
          }> lowercase</label>
          <label><input type="checkbox" class="wizard-dedup" ${
            d.preprocessing.deduplicate ? 'checked' : ''
          }> drop exact duplicates</label>
          <label>Characters to remove <input class="wizard-remove-chars"
            value="${d.preprocessing.remove_chars.join('')}"></label>
        `;
      case 3:
        return `
          <button class="wizard-preset">use preset for ${d.task}</button>
          <label>Entity types (one per line, parent/child for hierarchy)
            <textarea class="wizard-entities" rows="5">${d.entity_lines.join('\n')}</textarea>
          </label>
          <label>Relation types (name@[subject, object] — events: type@[role, ...])
            <textarea class="wizard-relations" rows="5">${d.relation_lines.join('\n')}</textarea>
          </label>
        `;
      case 4:
        return `
          <p>Optional gazetteer facts, one JSON object per line.</p>
          <textarea class="wizard-preannotation" rows="5">${d.preannotation}</textarea>
        `;
      default: {
        const texts = d.texts_raw.split('\n').filter((line) => line.trim()).length;
        return `
          <ul class="wizard-review">
            <li>name: <b class="review-name">${d.name}</b></li>
            <li>task: <b class="review-task">${d.task}</b> (${d.language})</li>
            <li>texts: <b class="review-texts">${texts}</b></li>
            <li>entity type lines: <b>${d.entity_lines.length}</b></li>
            <li>relation type lines: <b>${d.relation_lines.length}</b></li>
            <li>model update: <b>${d.model_update}</b>, clustering: <b>${d.clustering}</b></li>
          </ul>
        `;
      }
    }
  }

  render(): void {
    const nav = STEP_TITLES.map(
      (title, index) =>
        `<span class="wizard-step ${index === this.step ? 'wizard-step--active' : ''}">${
          index + 1
        }. ${title}</span>`,
    ).join(' ');
    const last = this.step === STEP_TITLES.length - 1;
    this.root.innerHTML = `
      <nav class="wizard-nav">${nav}</nav>
      <section class="wizard-body">${this.stepBody()}</section>
      <p class="wizard-error"></p>
      <div class="wizard-controls">
        <button class="wizard-back" ${this.step === 0 ? 'disabled' : ''}>back</button>
        ${
          last
            ? '<button class="wizard-create">CREATE</button>'
            : '<button class="wizard-next">next</button>'
        }
      </div>
    `;
    (this.root.querySelector('.wizard-back') as HTMLButtonElement).onclick = () => this.back();
    const nextButton = this.root.querySelector('.wizard-next') as HTMLButtonElement | null;
    if (nextButton) nextButton.onclick = () => this.next();
    const createButton = this.root.querySelector('.wizard-create') as HTMLButtonElement | null;
    if (createButton)
      createButton.onclick = () => {
        this.collectStep();
        void this.create();
      };
    const preset = this.root.querySelector('.wizard-preset') as HTMLButtonElement | null;
    if (preset)
      preset.onclick = () => {
        const scheme = PRESET_SCHEMES[this.draft.task];
        this.textarea('.wizard-entities').value = scheme.entities;
        this.textarea('.wizard-relations').value = scheme.relations;
      };
  }
}
