// Shapes of the REST payloads the client consumes.

export interface TokenInfo {
  text: string;
  start: number;
  end: number;
}

export interface MarkupJson {
  isEntity: boolean;
  suggested: boolean;
  _id: string;
  name: string;
  labelId: string;
  source?: string;
  target?: string;
  start?: number;
  end?: number;
  entityText?: string;
}

export interface TextBlock {
  docId: string;
  text: string;
  language: string;
  clusterId: number | null;
  saved: boolean;
  tokens: TokenInfo[];
  markups: MarkupJson[];
  triples: Record<string, unknown>[];
  text_id: string;
  project_id: string;
  version: number;
}

export interface TextSummary {
  text_id: string;
  doc_id: string;
  text: string;
  cluster_id: number | null;
  saved: boolean;
  version: number;
  markup_count: number;
}

export interface EntityTypeJson {
  name: string;
  color: string;
  parent?: string;
}

export interface RelationTypeJson {
  name: string;
  subjectTypes: string[];
  objectTypes: string[];
  parent?: string;
}

export interface OntologyJson {
  task: string;
  entityTypes: EntityTypeJson[];
  relationTypes: RelationTypeJson[];
}

export interface ProjectInfo {
  project_id: string;
  name: string;
  task: string;
  language: string;
}

export interface ProjectDetail extends ProjectInfo {
  description: string;
  model_update: boolean;
  clustering: boolean;
  ontology: OntologyJson;
}

export interface DashboardCounts {
  texts: number;
  saved: number;
  clusters: Record<string, number>;
  entities: number;
  relations: number;
  triples: number;
  accepted: number;
  suggested: number;
}

export interface GraphNode {
  id: string;
  type: string;
  surface: string;
  quality: string;
  count: number;
}

export interface GraphEdge {
  source: string;
  name: string;
  target: string;
  quality: string;
  count: number;
}

export interface GraphViewJson {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface WizardPayload {
  name: string;
  description: string;
  task: string;
  language: string;
  model_update: boolean;
  clustering: boolean;
  preprocessing: {
    lowercase: boolean;
    remove_chars: string[];
    deduplicate: boolean;
  };
  entity_lines: string[];
  relation_lines: string[];
  texts: string[];
  texts_raw: string;
  preannotation: string;
}

export interface CreateProjectResponse {
  project_id: string;
  review: Record<string, unknown>;
  preprocessing: { duplicates_dropped: number; characters_removed: number };
  preannotation: { created: number; errors: { row: number; error: string }[] };
}

export interface TransitionResponse {
  action: string;
  accepted: string[];
  deleted: string[];
  version: number;
}

export interface AutolabelResponse {
  created: MarkupJson[];
  unanchorable: Record<string, unknown>[];
  warnings: string[];
  prefix: string;
  version: number;
}

export interface PropagateResponse {
  created: (MarkupJson & { text_id: string })[];
  versions: Record<string, number>;
}
