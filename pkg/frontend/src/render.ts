/** Figure-set orchestration: one run directory in, a set of PNG files out. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { ArtifactError, kappaTag, loadFields, loadReport, loadTrace, Report } from "./artifacts.js";
import { renderChart, Series } from "./chart.js";
import { renderHeatmap } from "./heatmap.js";
import type { Color } from "./raster.js";

export type FigureKind = "heatmaps" | "curves" | "sweep";

export interface PlotJob {
  inputDir: string;
  outputDir: string;
  only?: FigureKind;
}

const PALETTE: ReadonlyArray<Color> = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [148, 103, 189],
  [255, 127, 14],
];

export function render(job: PlotJob): string[] {
  const report = loadReport(job.inputDir);
  mkdirSync(job.outputDir, { recursive: true });
  const written: string[] = [];
  const emit = (name: string, png: Buffer) => {
    const path = join(job.outputDir, name);
    writeFileSync(path, png);
    written.push(path);
  };

  const wantsHeat = !job.only || job.only === "heatmaps";
  const wantsCurves = !job.only || job.only === "curves";
  const wantsSweep = !job.only || job.only === "sweep";

  if (report.stages.length > 0) {
    if (wantsHeat) renderStageHeatmaps(job.inputDir, report, emit);
    if (wantsCurves) renderCurves(job.inputDir, report, emit);
  }
  if (report.sweep.length > 0 && wantsSweep) renderSweepTrends(report, emit);

  if (written.length === 0) {
    throw new ArtifactError(
      join(job.inputDir, "report.json"),
      `nothing to render for mode=${report.mode} with filter ${job.only ?? "none"}; ` +
        "expected stage artifacts (fields_kappa_*.csv, trace_kappa_*.csv) or sweep entries",
    );
  }
  return written;
}

function renderStageHeatmaps(dir: string, report: Report,
                             emit: (name: string, png: Buffer) => void): void {
  for (const stage of report.stages) {
    const tag = kappaTag(stage.kappa);
    const table = loadFields(join(dir, `fields_kappa_${tag}.csv`), report.speciesCount);
    for (let sp = 0; sp < report.speciesCount; sp++) {
      const img = renderHeatmap(table, sp, report.capacities[sp]!,
                                `U_${sp + 1}  KAPPA = ${tag}`);
      emit(`heatmap_u${sp + 1}_kappa_${tag}.png`, img.png());
    }
  }
}

function renderCurves(dir: string, report: Report,
                      emit: (name: string, png: Buffer) => void): void {
  const kappas = report.stages.map((s) => s.kappa);

  const overlap = renderChart({
    title: "OVERLAP VS KAPPA",
    xLabel: "KAPPA",
    yLabel: "SUM INT U_I^2 U_J^2",
    xLog: true,
    yLog: true,
    series: [{ label: "overlap", x: kappas,
               y: report.stages.map((s) => s.overlapTotal), color: PALETTE[0]! }],
  });
  emit("overlap_vs_kappa.png", overlap.png());

  const refLevel = report.stages.find((s) => s.upperBound !== null)?.upperBound;
  const energy = renderChart({
    title: "ENERGY VS KAPPA",
    xLabel: "KAPPA",
    yLabel: "I",
    xLog: true,
    series: [{ label: "I", x: kappas,
               y: report.stages.map((s) => s.energy), color: PALETTE[1]! }],
    refLines: refLevel != null ? [[refLevel, "MU + TAU"]] : [],
  });
  emit("energy_vs_kappa.png", energy.png());

  const series: Series[] = report.stages.map((stage, i) => {
    const trace = loadTrace(join(dir, `trace_kappa_${kappaTag(stage.kappa)}.csv`));
    return {
      label: `K=${kappaTag(stage.kappa)}`,
      x: trace.iter,
      y: trace.residual.map((r) => Math.max(r, 1e-300)),
      color: PALETTE[i % PALETTE.length]!,
      markers: false,
    };
  });
  const trace = renderChart({
    title: "CONVERGENCE TRACE",
    xLabel: "ITERATION",
    yLabel: "RESIDUAL",
    yLog: true,
    series,
  });
  emit("convergence_trace.png", trace.png());
}

function renderSweepTrends(report: Report,
                           emit: (name: string, png: Buffer) => void): void {
  const widths = report.sweep.map((e) => e.width);
  const series: Series[] = [
    { label: "TAU", x: widths, y: report.sweep.map((e) => e.tauEps), color: PALETTE[0]! },
    { label: "D^2", x: widths, y: report.sweep.map((e) => e.distanceSq), color: PALETTE[1]! },
  ];
  if (report.sweep.every((e) => e.sigmaEps !== null)) {
    series.push({ label: "SIGMA", x: widths,
                  y: report.sweep.map((e) => e.sigmaEps!), color: PALETTE[2]! });
  }
  const img = renderChart({
    title: "SHRINKING CHANNEL TRENDS",
    xLabel: "CHANNEL WIDTH",
    yLabel: "VALUE",
    yLog: true,
    series,
  });
  emit("sweep_trends.png", img.png());
}
