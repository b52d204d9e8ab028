// raw-article acquisition: offline local JSON, or an HTTP endpoint with
// API-key auth and bounded backoff on rate limits

import { readFileSync, writeFileSync } from "node:fs";
import { toCsvLine } from "./csv.js";
import { RAW_HEADER } from "./score.js";
import { AuthError, NetworkError, RateLimited, RawArticle } from "./types.js";

export interface ProviderConfig {
  url?: string;
  apiKeyEnv?: string;
  maxRetries?: number;
  baseDelayMs?: number;
  fetchImpl?: typeof fetch; // injectable for tests
}

/** any parseable timestamp becomes the same instant rendered in UTC (+00:00). */
export function toUtcOffset(ts: string): string {
  const ms = Date.parse(ts);
  if (Number.isNaN(ms)) throw new Error(`unparseable timestamp: ${ts}`);
  const iso = new Date(ms).toISOString(); // ...T..:..:..(.sss)Z
  const trimmed = iso.endsWith(".000Z") ? iso.slice(0, -5) + "Z" : iso;
  return trimmed.slice(0, -1) + "+00:00";
}

function normalizeEntries(entries: Record<string, unknown>[]): RawArticle[] {
  return entries.map((e) => ({
    ticker: String(e.ticker ?? ""),
    publishedAt: toUtcOffset(String(e.published_at ?? "")),
    headline: String(e.headline ?? ""),
    summary: String(e.summary ?? ""),
  }));
}

export function serializeRaw(articles: RawArticle[]): string {
  const lines = [RAW_HEADER.join(",")];
  for (const a of articles) {
    lines.push(toCsvLine([a.ticker, a.publishedAt, a.headline, a.summary]));
  }
  return lines.join("\n") + "\n";
}

export function fetchOffline(inputPath: string, outputPath: string): number {
  const entries = JSON.parse(readFileSync(inputPath, "utf8")) as Record<string, unknown>[];
  const articles = normalizeEntries(entries);
  writeFileSync(outputPath, serializeRaw(articles));
  return articles.length;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export async function fetchOnline(config: ProviderConfig, outputPath: string): Promise<number> {
  const { url, apiKeyEnv = "NEWS_API_KEY", maxRetries = 4, baseDelayMs = 500 } = config;
  if (!url) throw new Error("online mode requires a provider url");
  const apiKey = process.env[apiKeyEnv];
  if (!apiKey) throw new AuthError(`missing API key: set ${apiKeyEnv}`);
  const doFetch = config.fetchImpl ?? fetch;

  let delay = baseDelayMs;
  for (let attempt = 0; ; attempt++) {
    let response: Response;
    try {
      response = await doFetch(url, { headers: { "X-Api-Key": apiKey } });
    } catch (err) {
      if (attempt >= maxRetries) throw new NetworkError(`fetch failed: ${err}`);
      await sleep(delay);
      delay *= 2;
      continue;
    }
    if (response.status === 401 || response.status === 403) {
      throw new AuthError(`provider rejected the API key (${response.status})`);
    }
    if (response.status === 429 || response.status >= 500) {
      if (attempt >= maxRetries) {
        throw new RateLimited(`gave up after ${attempt + 1} attempts (${response.status})`);
      }
      await sleep(delay);
      delay *= 2;
      continue;
    }
    if (!response.ok) throw new NetworkError(`provider error ${response.status}`);
    const entries = (await response.json()) as Record<string, unknown>[];
    const articles = normalizeEntries(entries);
    writeFileSync(outputPath, serializeRaw(articles));
    return articles.length;
  }
}
