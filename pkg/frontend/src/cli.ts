// usage:
//   node dist/cli.js score --input raw.csv|raw.json --output scored.csv
//   node dist/cli.js fetch --offline --input articles.json --output raw.csv
//   node dist/cli.js fetch --url https://provider/news --output raw.csv

import { fetchOffline, fetchOnline } from "./fetchNews.js";
import { scoreFile } from "./score.js";
import { AuthError, ModelLoadFailure, NetworkError, RateLimited } from "./types.js";

function parseFlags(argv: string[]): Record<string, string | boolean> {
  const flags: Record<string, string | boolean> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) continue;
    const key = arg.slice(2);
    const next = argv[i + 1];
    if (next === undefined || next.startsWith("--")) {
      flags[key] = true;
    } else {
      flags[key] = next;
      i++;
    }
  }
  return flags;
}

function usage(): number {
  console.error("usage: cli.js score --input FILE --output FILE");
  console.error("       cli.js fetch (--offline --input FILE | --url URL) --output FILE");
  return 2;
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  const flags = parseFlags(rest);
  try {
    if (command === "score") {
      if (typeof flags.input !== "string" || typeof flags.output !== "string") return usage();
      const { written, skipped } = scoreFile(flags.input, flags.output);
      console.log(`scored ${written} article(s), skipped ${skipped} unparseable row(s)`);
      return 0;
    }
    if (command === "fetch") {
      if (typeof flags.output !== "string") return usage();
      if (flags.offline) {
        if (typeof flags.input !== "string") return usage();
        const n = fetchOffline(flags.input, flags.output);
        console.log(`normalized ${n} article(s)`);
        return 0;
      }
      if (typeof flags.url !== "string") return usage();
      const n = await fetchOnline({ url: flags.url }, flags.output);
      console.log(`fetched ${n} article(s)`);
      return 0;
    }
    return usage();
  } catch (err) {
    if (err instanceof AuthError) {
      console.error(`auth error: ${err.message}`);
      return 3;
    }
    if (err instanceof RateLimited || err instanceof NetworkError) {
      console.error(`network error: ${err.message}`);
      return 4;
    }
    if (err instanceof ModelLoadFailure) {
      console.error(`model error: ${err.message}`);
      return 5;
    }
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() ?? "",
);
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
