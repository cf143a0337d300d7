import type { DocumentJson, TokenJson, TokenizationJson } from "../src/types.js";

/** Whitespace tokenization with code-point offsets, one sentence per line. */
export function tokenizeWs(text: string): TokenizationJson {
  const tokens: TokenJson[] = [];
  const sentences: [number, number][] = [];
  let cp = 0;
  let lineStartToken = 0;
  let current: { start: number; parts: string[] } | null = null;
  const flushToken = () => {
    if (current) {
      tokens.push([tokens.length, current.start, cp, current.parts.join("")]);
      current = null;
    }
  };
  const flushLine = () => {
    if (tokens.length > lineStartToken) sentences.push([lineStartToken, tokens.length]);
    lineStartToken = tokens.length;
  };
  for (const ch of text) {
    if (ch === "\n") {
      flushToken();
      flushLine();
    } else if (/\s/u.test(ch)) {
      flushToken();
    } else {
      if (!current) current = { start: cp, parts: [] };
      current.parts.push(ch);
    }
    cp += 1;
  }
  flushToken();
  flushLine();
  return { id: "whitespace", tool: "whitespace", tokens, sentences };
}

export function makeDoc(text: string, overrides: Partial<DocumentJson> = {}): DocumentJson {
  return {
    schema_version: "1",
    id: "t",
    text,
    language: null,
    tokenizations: [tokenizeWs(text)],
    mentions: [],
    frames: [],
    clusters: [],
    type_assignments: [],
    temporal_links: [],
    metadata: [],
    ...overrides,
  };
}

export function mention(id: string, start: number, end: number, surface: string) {
  return { id, span: { tokenization_id: "whitespace", start_token: start, end_token: end }, surface };
}
