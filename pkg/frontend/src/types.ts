/** Wire types mirroring the workspace service's JSON documents. */

export interface ReferentDoc {
  kind: "generic" | "variable" | "marker";
  value?: string;
}

export interface ConceptNodeDoc {
  node_id: string;
  type_id: string;
  referent: ReferentDoc;
}

export interface RelationEdgeDoc {
  edge_id: string;
  rel_id: string;
  source: string;
  target: string;
}

export interface GraphDoc {
  nodes: ConceptNodeDoc[];
  edges: RelationEdgeDoc[];
}

export interface ModelDoc {
  id?: string;
  label?: string;
  head_node: string;
  graph: GraphDoc;
}

export interface FormFieldDoc {
  relation_id: string;
  relation_label: string;
  target_type_id: string;
  /** markers of the controlled vocabulary, or the string "free" */
  value_domain: string[] | "free";
  required: boolean;
}

export interface FormSchemaDoc {
  model_id: string;
  fields: FormFieldDoc[];
}

export interface IssueDoc {
  code: string;
  message: string;
  where: string;
}

export interface ValidateResponse {
  valid: boolean;
  issues: IssueDoc[];
}

export interface SegmentDoc {
  id: string;
  stratum_id: string;
  start_ms: number;
  end_ms: number;
  model_id: string;
  annotation: GraphDoc;
  version: number;
}

export interface MediaDoc {
  id: string;
  title: string;
  uri: string;
  duration_ms: number;
}

export interface StratumDoc {
  id: string;
  media_id: string;
  kind: string;
}

export interface CorpusDoc {
  media: MediaDoc[];
  strata: StratumDoc[];
  segments: SegmentDoc[];
  models: ModelDoc[];
}

export interface StepDoc {
  id: string;
  label: string;
  requirement: GraphDoc;
}

export interface TransitionDoc {
  from: string;
  to: string;
  condition: string[];
}

export interface ScenarioDoc {
  id: string;
  steps: StepDoc[];
  transitions: TransitionDoc[];
  start_id: string;
  final_ids: string[];
}

export interface MatchEntryDoc {
  segment_id: string;
  media_id: string;
  start_ms: number;
  end_ms: number;
  match_score: number;
}

export interface AlignmentDoc {
  scheme: string;
  external_ref: string;
}

export interface StepBindingDoc {
  step_id: string;
  label: string;
  matches: MatchEntryDoc[];
  links: AlignmentDoc[];
  requirement_text?: string;
}

export interface ManifestDoc {
  scenario_id: string;
  mode: "fixed" | "open";
  steps: StepBindingDoc[];
  digest?: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
