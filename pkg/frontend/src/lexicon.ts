// weighted financial sentiment lexicon; the classifier's "weights".
// Entries are matched on lowercased text: single tokens against the token
// stream, multi-word phrases against the normalized text. Do not edit without
// refreshing LEXICON_SHA256 and the golden files -- tests pin both.

import { createHash } from "node:crypto";

export const POSITIVE: Record<string, number> = {
  // results and guidance
  beat: 1.2, beats: 1.2, "beats estimates": 1.6, "record profit": 1.8,
  "record revenue": 1.6, profit: 0.8, profitable: 0.9, "raises guidance": 1.8,
  "raised guidance": 1.8, "strong demand": 1.3, "strong results": 1.4,
  outperform: 1.2, outperforms: 1.2, exceeded: 1.0, exceeds: 1.0,
  // market action
  surge: 1.3, surges: 1.3, surged: 1.3, soar: 1.4, soars: 1.4, soared: 1.4,
  rally: 1.1, rallies: 1.1, rallied: 1.1, jump: 0.9, jumps: 0.9, jumped: 0.9,
  gain: 0.7, gains: 0.7, climbed: 0.8, climbs: 0.8, rebound: 0.9, rebounds: 0.9,
  // corporate events
  upgrade: 1.2, upgraded: 1.2, upgrades: 1.2, buyback: 1.1, dividend: 0.6,
  "dividend increase": 1.4, acquisition: 0.5, approval: 1.2, approve: 1.0,
  approves: 1.0, approved: 1.2, breakthrough: 1.4, "wins contract": 1.5,
  wins: 0.9, partnership: 0.7, expansion: 0.8, expands: 0.8, launch: 0.5,
  // tone
  bullish: 1.2, optimistic: 0.9, upbeat: 0.9, strong: 0.7, growth: 0.7,
  momentum: 0.6, robust: 0.8, resilient: 0.7,
};

export const NEGATIVE: Record<string, number> = {
  // distress
  bankruptcy: 2.6, bankrupt: 2.4, insolvency: 2.4, default: 2.0, defaults: 2.0,
  delisted: 2.0, delisting: 1.9, liquidation: 2.2, "going concern": 2.2,
  // legal and regulatory
  fraud: 2.4, investigation: 1.5, investigates: 1.4, probe: 1.4, lawsuit: 1.3,
  subpoena: 1.5, "sec charges": 2.2, fine: 0.9, fined: 1.1, penalty: 1.0,
  recall: 1.4, recalls: 1.4, scandal: 1.8, restatement: 1.7, violation: 1.2,
  // results and guidance
  miss: 1.2, misses: 1.2, "misses estimates": 1.6, "cuts guidance": 1.8,
  "cut guidance": 1.8, shortfall: 1.3, loss: 0.9, losses: 0.9, unprofitable: 1.2,
  "weak demand": 1.3, writedown: 1.4, impairment: 1.3,
  // market action
  plunge: 1.5, plunges: 1.5, plunged: 1.5, plummet: 1.6, plummets: 1.6,
  plummeted: 1.6, crash: 1.7, crashes: 1.7, tumble: 1.2, tumbles: 1.2,
  tumbled: 1.2, sink: 1.1, sinks: 1.1, sank: 1.1, slump: 1.2, slumps: 1.2,
  fall: 0.7, falls: 0.7, fell: 0.7, drop: 0.7, drops: 0.7, dropped: 0.7,
  slide: 0.8, slides: 0.8, selloff: 1.3,
  // corporate events
  downgrade: 1.3, downgraded: 1.3, downgrades: 1.3, layoff: 1.3, layoffs: 1.3,
  resigns: 1.1, resignation: 1.1, halted: 1.5, halt: 1.2, suspended: 1.4,
  bailout: 1.6, dilution: 1.0, "chapter 11": 2.4,
  // tone
  bearish: 1.2, pessimistic: 0.9, warning: 1.0, warns: 1.1, warned: 1.1,
  weak: 0.8, fears: 0.9, concerns: 0.7, uncertainty: 0.7, turmoil: 1.1,
  struggles: 1.0, struggling: 1.0,
};

export const NEGATORS = new Set([
  "not", "no", "never", "without", "denies", "denied", "avoids", "avoided",
  "dismisses", "dismissed",
]);

export function lexiconChecksum(): string {
  const payload = JSON.stringify({ POSITIVE, NEGATIVE, NEGATORS: [...NEGATORS].sort() });
  return createHash("sha256").update(payload).digest("hex");
}

// pinned fingerprint of the weights above; classifier load fails on mismatch
export const LEXICON_SHA256 =
  "189ac7a965981d8e2eb6abb12502b7d5932bc7320c29c243179a45aa1b8b6ee9";
