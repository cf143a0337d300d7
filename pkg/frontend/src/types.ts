/**
 * Wire types for the canonical document JSON exchanged with the annotation
 * service, plus the view model the renderer consumes.
 *
 * All character offsets in the wire format are Unicode code points, not
 * UTF-16 units; the renderer converts before slicing strings.
 */

export type TokenJson = [number, number, number, string]; // index, char_start, char_end, surface

export interface SpanJson {
  tokenization_id: string;
  start_token: number;
  end_token: number;
}

export interface TokenizationJson {
  id: string;
  tool: string;
  tokens: TokenJson[];
  sentences: [number, number][];
}

export interface MentionJson {
  id: string;
  span: SpanJson;
  surface: string;
}

export interface FrameJson {
  id: string;
  frame_label: string;
  trigger: string;
  roles: [string, string][]; // [role label, mention id]
}

export interface ClusterJson {
  id: string;
  mention_ids: string[];
}

export interface TypeAssignmentJson {
  target: string;
  path: string[];
  per_level_scores: number[] | null;
}

export interface TemporalLinkJson {
  source: string;
  target: string;
  relation: string;
  label_set: string;
}

export interface MetadataJson {
  annotator_name: string;
  version: string;
  timestamp: string;
  content_digest: string;
}

export interface DocumentJson {
  schema_version: string;
  id: string;
  text: string;
  language: string | null;
  tokenizations: TokenizationJson[];
  mentions: MentionJson[];
  frames: FrameJson[];
  clusters: ClusterJson[];
  type_assignments: TypeAssignmentJson[];
  temporal_links: TemporalLinkJson[];
  metadata: MetadataJson[];
}

/** A contiguous code-point range decorated by the renderer. */
export interface Highlight {
  start: number; // code points
  end: number;
  kind: "trigger" | "role" | "mention";
  cssClass: string;
  title: string;
  color?: string;
}

export interface TriggerHighlight {
  start: number;
  end: number;
  frameId: string;
  frameLabel: string;
  roles: { label: string; surface: string }[];
}

export interface RoleHighlight {
  start: number;
  end: number;
  roleLabel: string;
  frameId: string;
  frameLabel: string;
}

export interface ClusterHighlight {
  start: number;
  end: number;
  clusterId: string;
  colorIndex: number;
  members: string[];
}

export interface AnnotationView {
  text: string;
  triggers: TriggerHighlight[];
  roles: RoleHighlight[];
  clusterMentions: ClusterHighlight[];
  /** cluster id -> palette index, one shared color per cluster */
  clusterColors: Map<string, number>;
}
