// deterministic lexicon classifier producing positive/neutral/negative probability triples

import {
  LEXICON_SHA256,
  NEGATIVE,
  NEGATORS,
  POSITIVE,
  lexiconChecksum,
} from "./lexicon.js";
import { ModelLoadFailure } from "./types.js";

export const TOKEN_LIMIT = 128;
const NEUTRAL_PRIOR = 1.0; // constant neutral logit; controls confidence spread
const NEGATION_WINDOW = 2; // tokens

let verified = false;

export function verifyLexicon(): void {
  if (verified) return;
  const actual = lexiconChecksum();
  if (actual !== LEXICON_SHA256) {
    throw new ModelLoadFailure(
      `lexicon checksum mismatch: expected ${LEXICON_SHA256}, got ${actual}`,
    );
  }
  verified = true;
}

export function tokenize(text: string): string[] {
  return text.toLowerCase().split(/[^a-z0-9]+/).filter((t) => t.length > 0);
}

/** headline + " " + summary, truncated from the end to the token limit. */
export function classifiedText(headline: string, summary: string): string {
  const joined = summary ? `${headline} ${summary}` : headline;
  const tokens = tokenize(joined);
  if (tokens.length <= TOKEN_LIMIT) return joined.toLowerCase();
  return tokens.slice(0, TOKEN_LIMIT).join(" ");
}

function phraseHits(text: string, lexicon: Record<string, number>): number {
  let score = 0;
  for (const [entry, weight] of Object.entries(lexicon)) {
    if (entry.includes(" ") && text.includes(entry)) score += weight;
  }
  return score;
}

interface TokenScores {
  pos: number;
  neg: number;
}

function tokenHits(tokens: string[]): TokenScores {
  let pos = 0;
  let neg = 0;
  for (let i = 0; i < tokens.length; i++) {
    const token = tokens[i];
    const posW = POSITIVE[token];
    const negW = NEGATIVE[token];
    if (posW === undefined && negW === undefined) continue;
    let negated = false;
    for (let k = 1; k <= NEGATION_WINDOW && i - k >= 0; k++) {
      if (NEGATORS.has(tokens[i - k])) {
        negated = true;
        break;
      }
    }
    if (posW !== undefined) {
      if (negated) neg += posW;
      else pos += posW;
    }
    if (negW !== undefined) {
      if (negated) pos += negW * 0.5; // negated bad news reads mildly positive
      else neg += negW;
    }
  }
  return { pos, neg };
}

export interface Triple {
  pPos: number;
  pNeu: number;
  pNeg: number;
}

/** softmax over (positive score, neutral prior, negative score). */
export function classify(headline: string, summary: string): Triple {
  verifyLexicon();
  const text = classifiedText(headline, summary);
  const tokens = tokenize(text);
  const { pos, neg } = tokenHits(tokens);
  const posLogit = pos + phraseHits(text, POSITIVE);
  const negLogit = neg + phraseHits(text, NEGATIVE);
  const ePos = Math.exp(posLogit);
  const eNeu = Math.exp(NEUTRAL_PRIOR);
  const eNeg = Math.exp(negLogit);
  const z = ePos + eNeu + eNeg;
  return { pPos: ePos / z, pNeu: eNeu / z, pNeg: eNeg / z };
}
