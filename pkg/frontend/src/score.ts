// batch scoring: raw-article CSV/JSON in, scored-article CSV out

import { readFileSync, writeFileSync } from "node:fs";
import { classify } from "./classifier.js";
import { parseCsv, toCsvLine } from "./csv.js";
import { RawArticle, ScoredArticle } from "./types.js";

export const RAW_HEADER = ["ticker", "published_at", "headline", "summary"];
export const SCORED_HEADER = ["ticker", "published_at", "p_pos", "p_neu", "p_neg"];

const TIMESTAMP_RE = /^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d{3}|\.\d{6})?(Z|[+-]\d{2}:\d{2})$/;

/** strict ISO-8601 check; trailing Z is rewritten as +00:00 for the engine. */
export function normalizeOffsetTimestamp(ts: string): string | null {
  if (!TIMESTAMP_RE.test(ts) || Number.isNaN(Date.parse(ts))) return null;
  return ts.endsWith("Z") ? ts.slice(0, -1) + "+00:00" : ts;
}

export interface ParseOutcome {
  articles: RawArticle[];
  skipped: number;
}

function rowToArticle(fields: string[]): RawArticle | null {
  if (fields.length < 3 || fields.length > 4) return null;
  const [ticker, publishedAt, headline, summary = ""] = fields;
  const normalized = normalizeOffsetTimestamp(publishedAt);
  if (!ticker || !headline || normalized === null) return null;
  return { ticker, publishedAt: normalized, headline, summary };
}

export function readRawArticles(path: string): ParseOutcome {
  const text = readFileSync(path, "utf8");
  const articles: RawArticle[] = [];
  let skipped = 0;
  if (path.endsWith(".json")) {
    for (const entry of JSON.parse(text) as Record<string, unknown>[]) {
      const article = rowToArticle([
        String(entry.ticker ?? ""),
        String(entry.published_at ?? ""),
        String(entry.headline ?? ""),
        String(entry.summary ?? ""),
      ]);
      if (article === null) skipped++;
      else articles.push(article);
    }
    return { articles, skipped };
  }
  const rows = parseCsv(text);
  if (rows.length === 0 || rows[0].join(",") !== RAW_HEADER.join(",")) {
    throw new Error(`bad raw-article header in ${path}: expected ${RAW_HEADER.join(",")}`);
  }
  for (const row of rows.slice(1)) {
    const article = rowToArticle(row);
    if (article === null) skipped++;
    else articles.push(article);
  }
  return { articles, skipped };
}

export function scoreArticle(article: RawArticle): ScoredArticle {
  const triple = classify(article.headline, article.summary);
  return {
    ticker: article.ticker,
    publishedAt: article.publishedAt,
    pPos: triple.pPos,
    pNeu: triple.pNeu,
    pNeg: triple.pNeg,
  };
}

export function serializeScored(rows: ScoredArticle[]): string {
  const lines = [SCORED_HEADER.join(",")];
  for (const r of rows) {
    lines.push(toCsvLine([
      r.ticker, r.publishedAt, String(r.pPos), String(r.pNeu), String(r.pNeg),
    ]));
  }
  return lines.join("\n") + "\n";
}

export interface ScoreResult {
  written: number;
  skipped: number;
}

export function scoreFile(inputPath: string, outputPath: string): ScoreResult {
  const { articles, skipped } = readRawArticles(inputPath);
  const scored = articles.map(scoreArticle);
  writeFileSync(outputPath, serializeScored(scored));
  return { written: scored.length, skipped };
}
