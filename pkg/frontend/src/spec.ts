import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { z } from "zod";

/** The three chart layouts this tool knows how to draw. */
export const FIGURE_KINDS = [
  "BlerVsSnr",
  "DispersionVsSnr",
  "PayloadVsDuration",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

const figureSpecSchema = z
  .object({
    kind: z.enum(FIGURE_KINDS),
    csv: z.array(z.string()).min(1),
    groupBy: z.array(z.string()).default([]),
    // per-kind defaults are filled in by the renderer; overrides live here
    x: z.string().optional(),
    y: z.string().optional(),
    yScale: z.enum(["linear", "log"]).optional(),
    xLabel: z.string().optional(),
    yLabel: z.string().optional(),
    title: z.string().optional(),
    width: z.number().int().positive().default(720),
    height: z.number().int().positive().default(480),
    out: z.string().optional(),
  })
  .strict();

export type FigureSpec = z.infer<typeof figureSpecSchema>;

export class SpecError extends Error {}

/**
 * Parse and validate a figure spec. CSV paths (and a relative `out`) are
 * resolved against the directory holding the spec file, so specs checked
 * into examples/ keep working from any cwd.
 */
export function loadSpec(path: string): FigureSpec {
  const text = readFileSync(path, "utf8");
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new SpecError(`${path}: not valid JSON (${(err as Error).message})`);
  }
  const parsed = figureSpecSchema.safeParse(doc);
  if (!parsed.success) {
    const what = parsed.error.issues
      .map((i) => (i.path.length ? `${i.path.join(".")}: ${i.message}` : i.message))
      .join("; ");
    throw new SpecError(`${path}: ${what}`);
  }
  const dir = dirname(path);
  const spec = parsed.data;
  return {
    ...spec,
    csv: spec.csv.map((p) => resolve(dir, p)),
    out: spec.out === undefined ? undefined : resolve(dir, spec.out),
  };
}
