import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { main } from "../src/cli.js";

const EXAMPLES = fileURLToPath(new URL("../examples", import.meta.url));

let tmp: string;
beforeEach(() => {
  tmp = mkdtempSync(join(tmpdir(), "figcli-"));
  vi.spyOn(console, "log").mockImplementation(() => {});
  vi.spyOn(console, "error").mockImplementation(() => {});
});
afterEach(() => {
  vi.restoreAllMocks();
});

describe("render CLI", () => {
  it("renders every checked-in example spec", () => {
    for (const name of ["bler_band", "dispersion", "payload"]) {
      const out = join(tmp, `${name}.svg`);
      const code = main(["--spec", join(EXAMPLES, `${name}.json`), "--out", out]);
      expect(code, name).toBe(0);
      const svg = readFileSync(out, "utf8");
      expect(svg.startsWith("<svg"), name).toBe(true);
      expect(svg.endsWith("</svg>\n"), name).toBe(true);
    }
  });

  it("writes byte-identical output on a second run", () => {
    const specPath = join(EXAMPLES, "bler_band.json");
    const a = join(tmp, "a.svg");
    const b = join(tmp, "b.svg");
    expect(main(["--spec", specPath, "--out", a])).toBe(0);
    expect(main(["--spec", specPath, "--out", b])).toBe(0);
    expect(readFileSync(a)).toEqual(readFileSync(b));
  });

  it("falls back to the spec's own out path", () => {
    const csv = join(EXAMPLES, "../test/fixtures/payload_dpsk.csv");
    const specPath = join(tmp, "fig.json");
    writeFileSync(
      specPath,
      JSON.stringify({
        kind: "PayloadVsDuration",
        csv: [csv],
        out: "fig.svg",
      }),
    );
    expect(main(["--spec", specPath])).toBe(0);
    expect(existsSync(join(tmp, "fig.svg"))).toBe(true);
  });

  it("exits 1 when the spec file is missing", () => {
    expect(main(["--spec", join(tmp, "nope.json")])).toBe(1);
  });

  it("exits 2 on malformed or invalid specs", () => {
    const bad = join(tmp, "bad.json");
    writeFileSync(bad, "{ not json");
    expect(main(["--spec", bad])).toBe(2);

    const unknownKind = join(tmp, "kind.json");
    writeFileSync(unknownKind, JSON.stringify({ kind: "PieChart", csv: ["x.csv"] }));
    expect(main(["--spec", unknownKind])).toBe(2);

    const extraKey = join(tmp, "extra.json");
    writeFileSync(
      extraKey,
      JSON.stringify({ kind: "BlerVsSnr", csv: ["x.csv"], theme: "dark" }),
    );
    expect(main(["--spec", extraKey])).toBe(2);

    expect(main([])).toBe(2);
  });

  it("exits 2 when a referenced column is absent", () => {
    const csv = join(EXAMPLES, "../test/fixtures/payload_dpsk.csv");
    const specPath = join(tmp, "fig.json");
    writeFileSync(
      specPath,
      JSON.stringify({
        kind: "DispersionVsSnr",
        csv: [csv],
        x: "duration_ms",
        out: "fig.svg",
      }),
    );
    expect(main(["--spec", specPath])).toBe(2);
  });

  it("exits 1 when a CSV is missing and 2 with no out path", () => {
    const specPath = join(tmp, "fig.json");
    writeFileSync(
      specPath,
      JSON.stringify({ kind: "BlerVsSnr", csv: ["missing.csv"], out: "o.svg" }),
    );
    expect(main(["--spec", specPath])).toBe(1);

    const noOut = join(tmp, "noout.json");
    const csv = join(EXAMPLES, "../test/fixtures/simulate.csv");
    writeFileSync(noOut, JSON.stringify({ kind: "BlerVsSnr", csv: [csv] }));
    expect(main(["--spec", noOut])).toBe(2);
  });
});
