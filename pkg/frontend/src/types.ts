export interface RawArticle {
  ticker: string;
  publishedAt: string; // ISO-8601 with numeric UTC offset
  headline: string;
  summary: string;
}

export interface ScoredArticle {
  ticker: string;
  publishedAt: string;
  pPos: number;
  pNeu: number;
  pNeg: number;
}

export class AuthError extends Error {}
export class RateLimited extends Error {}
export class NetworkError extends Error {}
export class ModelLoadFailure extends Error {}
