/** Fixture loading for the contract tests.
 *
 * Fixtures are recorded from the real gateway by scripts/record_fixtures.py;
 * each file holds one request and the exact response it produced.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export interface Fixture<T> {
  request: {
    method: string;
    path: string;
    as?: string;
    body?: unknown;
    params?: Record<string, string>;
  };
  status: number;
  body: T;
}

const FIXTURES_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function loadFixture<T>(name: string): Fixture<T> {
  const raw = readFileSync(join(FIXTURES_DIR, `${name}.json`), "utf8");
  return JSON.parse(raw) as Fixture<T>;
}
