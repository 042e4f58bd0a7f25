/** Loaders for the solver's emitted files: report.json, fields and trace CSVs. */

import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

export class ArtifactError extends Error {
  constructor(readonly file: string, message: string) {
    super(`${file}: ${message}`);
  }
}

export interface StageInfo {
  kappa: number;
  energy: number;
  overlapTotal: number;
  converged: boolean;
  upperBound: number | null; // mu + tau reference level
}

export interface SweepEntry {
  width: number;
  tauEps: number;
  sigmaEps: number | null;
  distanceSq: number;
}

export interface Report {
  speciesCount: number;
  capacities: number[]; // carrying capacity per species
  stages: StageInfo[];
  sweep: SweepEntry[];
  mode: string;
}

export interface FieldsTable {
  xs: number[]; // sorted unique cell-center coordinates
  ys: number[];
  // dense per-species value grid, NaN outside the domain
  values: Float64Array[];
  labels: Int8Array; // -1 outside, 0 channel, 1.. cores
  nx: number;
  ny: number;
}

export interface Trace {
  iter: number[];
  energy: number[];
  residual: number[];
}

export function loadReport(dir: string): Report {
  const path = join(dir, "report.json");
  if (!existsSync(path)) throw new ArtifactError(path, "missing report.json");
  let raw: any;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new ArtifactError(path, `not valid JSON (${(err as Error).message})`);
  }
  const constants = raw.species_constants;
  if (!Array.isArray(constants) || constants.length === 0) {
    throw new ArtifactError(path, "species_constants section missing");
  }
  const stagesRaw = raw.stages ?? [];
  const stages: StageInfo[] = stagesRaw.map((s: any, i: number) => {
    if (typeof s.kappa !== "number" || typeof s.energy !== "number") {
      throw new ArtifactError(path, `stage ${i} lacks kappa/energy`);
    }
    return {
      kappa: s.kappa,
      energy: s.energy,
      overlapTotal: s.overlap?.total ?? NaN,
      converged: Boolean(s.converged),
      upperBound: typeof s.sandwich === "object" ? s.sandwich.upper_bound : null,
    };
  });
  const sweep: SweepEntry[] = (raw.sweep?.entries ?? []).map((e: any) => ({
    width: e.width,
    tauEps: e.tau_eps,
    sigmaEps: e.sigma_eps ?? null,
    distanceSq: e.distance_sq,
  }));
  return {
    speciesCount: constants.length,
    capacities: constants.map((c: any) => c.A),
    stages,
    sweep,
    mode: raw.mode ?? "solve",
  };
}

export function loadFields(path: string, speciesCount: number): FieldsTable {
  if (!existsSync(path)) throw new ArtifactError(path, "missing fields file");
  const lines = readFileSync(path, "utf-8").trimEnd().split("\n");
  const header = lines[0] ?? "";
  const expected = "x,y,label," +
    Array.from({ length: speciesCount }, (_, i) => `u_${i + 1}`).join(",");
  if (header !== expected) {
    throw new ArtifactError(path, `header is "${header}", expected "${expected}"`);
  }
  const xs = new Set<number>();
  const ys = new Set<number>();
  const rows: Array<{ x: number; y: number; label: number; u: number[] }> = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i]!.split(",");
    if (parts.length !== 3 + speciesCount) {
      throw new ArtifactError(path, `row ${i} has ${parts.length} columns`);
    }
    const x = Number(parts[0]);
    const y = Number(parts[1]);
    const label = parts[2] === "channel" ? 0 : Number(parts[2]!.replace("core_", ""));
    const u = parts.slice(3).map(Number);
    if ([x, y, ...u].some((v) => !Number.isFinite(v))) {
      throw new ArtifactError(path, `row ${i} has non-numeric values`);
    }
    xs.add(x);
    ys.add(y);
    rows.push({ x, y, label, u });
  }
  const xsArr = [...xs].sort((a, b) => a - b);
  const ysArr = [...ys].sort((a, b) => a - b);
  const xi = new Map(xsArr.map((v, i) => [v, i]));
  const yi = new Map(ysArr.map((v, i) => [v, i]));
  const nx = xsArr.length;
  const ny = ysArr.length;
  const values = Array.from({ length: speciesCount }, () => {
    const a = new Float64Array(nx * ny);
    a.fill(NaN);
    return a;
  });
  const labels = new Int8Array(nx * ny).fill(-1);
  for (const row of rows) {
    const idx = yi.get(row.y)! * nx + xi.get(row.x)!;
    labels[idx] = row.label;
    for (let s = 0; s < speciesCount; s++) values[s]![idx] = row.u[s]!;
  }
  return { xs: xsArr, ys: ysArr, values, labels, nx, ny };
}

export function loadTrace(path: string): Trace {
  if (!existsSync(path)) throw new ArtifactError(path, "missing trace file");
  const lines = readFileSync(path, "utf-8").trimEnd().split("\n");
  if (lines[0] !== "iter,I,residual,h1_core_distance") {
    throw new ArtifactError(path, `unexpected header "${lines[0]}"`);
  }
  const iter: number[] = [];
  const energy: number[] = [];
  const residual: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const [it, e, r] = lines[i]!.split(",");
    iter.push(Number(it));
    energy.push(Number(e));
    residual.push(Number(r));
  }
  return { iter, energy, residual };
}

/** fields_kappa_<tag>.csv tag for a kappa value, mirroring the writer. */
export function kappaTag(kappa: number): string {
  if (Number.isInteger(kappa) && Math.abs(kappa) < 1e15) return String(kappa);
  return String(kappa).replace("+", "");
}
