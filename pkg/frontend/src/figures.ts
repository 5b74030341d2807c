/**
 * Figure rendering for the study outputs.
 *
 * Four figure kinds cover the deliverables: weight profiles over time,
 * energy decay with a fitted slope and the theoretical envelope, transient
 * amplification against its envelope, and the log-log threshold scaling with
 * the fitted exponents annotated.  Theoretical curves are parameterized
 * exclusively from the run manifest (nu, mu, delta0, regime) - nothing is
 * recomputed from simulation internals.  Rendering never mutates its inputs
 * and is byte-for-byte idempotent.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { SchemaError, Table, column, parseCsv } from "./csv.js";
import { ExponentialFit, fitLogLinear } from "./regression.js";
import { PALETTE, Scene, extent, fmt } from "./svg.js";

export type FigureKind = "multiplier" | "decay" | "envelope" | "scaling";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  output: string;
  manifest?: string;
  column?: string;
  window?: [number, number];
  regime?: string;
  title?: string;
}

export interface ManifestParams {
  nu: number;
  mu: number;
  delta0: number;
  regime: string;
}

export function loadManifestParams(path: string): ManifestParams {
  const doc = JSON.parse(readFileSync(path, "utf-8"));
  const params = doc?.config?.params ?? doc?.params ?? doc;
  for (const key of ["nu", "mu", "delta0", "regime"]) {
    if (!(key in params)) {
      throw new SchemaError(`manifest is missing params.${key}`);
    }
  }
  return {
    nu: params.nu,
    mu: params.mu,
    delta0: params.delta0,
    regime: params.regime,
  };
}

/** log of the regime amplification envelope for unit data. */
export function envelopeLog(p: ManifestParams, t: number): number {
  const bracket = 0.5 * Math.log1p(t * t);
  const lam = Math.min(p.nu, p.mu);
  switch (p.regime) {
    case "NU_LE_MU3":
      return (
        Math.min(-Math.log(p.mu) / 3, bracket) - p.delta0 * Math.cbrt(p.nu) * t
      );
    case "MU3_LE_NU_LE_MU13":
      return bracket - p.delta0 * Math.cbrt(lam) * t;
    case "MU13_LE_NU":
      return (
        Math.log(p.nu / Math.cbrt(p.mu)) + bracket - p.delta0 * Math.cbrt(p.mu) * t
      );
    default:
      throw new SchemaError(`unknown regime '${p.regime}' in manifest`);
  }
}

function readTable(path: string, required: string[]): Table {
  return parseCsv(readFileSync(path, "utf-8"), required);
}

// ---------------------------------------------------------------------------
// figure kinds
// ---------------------------------------------------------------------------

function renderMultiplier(spec: FigureSpec): string {
  const table = readTable(spec.input, ["t", "k", "eta"]);
  const col = spec.column ?? "log_total";
  const t = column(table, "t");
  const ks = column(table, "k");
  const etas = column(table, "eta");
  const vals = column(table, col);
  const groups = new Map<string, { t: number[]; v: number[] }>();
  for (let i = 0; i < t.length; i++) {
    const key = `k=${fmt(ks[i], 4)} eta=${fmt(etas[i], 4)}`;
    if (!groups.has(key)) groups.set(key, { t: [], v: [] });
    const g = groups.get(key)!;
    g.t.push(t[i]);
    g.v.push(vals[i]);
  }
  const scene = new Scene(
    extent(t),
    extent(vals),
    spec.title ?? `weight profile: ${col}`,
    "t",
    col,
  );
  const legend: Array<[string, string]> = [];
  let i = 0;
  for (const [key, g] of groups) {
    const color = PALETTE[i % PALETTE.length];
    const order = g.t.map((_, j) => j).sort((a, b) => g.t[a] - g.t[b]);
    scene.polyline(order.map((j) => g.t[j]), order.map((j) => g.v[j]), color);
    if (legend.length < 8) legend.push([key, color]);
    i++;
  }
  scene.legend(legend);
  return scene.render();
}

export interface DecayResult {
  svg: string;
  fit: ExponentialFit;
}

export function decayFigure(spec: FigureSpec): DecayResult {
  const table = readTable(spec.input, ["t"]);
  const col = spec.column ?? "E_k";
  const t = column(table, "t");
  const e = column(table, col);
  const [wLo, wHi] = spec.window ?? [t[0], t[t.length - 1]];
  const tw: number[] = [];
  const ew: number[] = [];
  for (let i = 0; i < t.length; i++) {
    if (t[i] >= wLo && t[i] <= wHi && e[i] > 0) {
      tw.push(t[i]);
      ew.push(e[i]);
    }
  }
  const fit = fitLogLinear(tw, ew);
  const logE = e.map((v) => (v > 0 ? Math.log(v) : NaN));
  const scene = new Scene(
    extent(t),
    extent(logE.filter((v) => Number.isFinite(v))),
    spec.title ?? `decay of ${col}`,
    "t",
    `log ${col}`,
  );
  scene.polyline(t, logE, PALETTE[0]);
  scene.polyline(
    [wLo, wHi],
    [fit.intercept + fit.slope * wLo, fit.intercept + fit.slope * wHi],
    PALETTE[1],
    "6,3",
  );
  if (spec.manifest) {
    const params = loadManifestParams(spec.manifest);
    // energy envelope: twice the amplitude envelope, anchored at the window
    const anchor =
      fit.intercept + fit.slope * wLo - 2 * envelopeLog(params, wLo);
    const te: number[] = [];
    const ve: number[] = [];
    for (let i = 0; i < t.length; i++) {
      te.push(t[i]);
      ve.push(anchor + 2 * envelopeLog(params, t[i]));
    }
    scene.polyline(te, ve, PALETTE[2], "2,3");
    scene.legend([
      ["data", PALETTE[0]],
      ["fitted line", PALETTE[1]],
      ["theory envelope (manifest)", PALETTE[2]],
    ]);
  } else {
    scene.legend([
      ["data", PALETTE[0]],
      ["fitted line", PALETTE[1]],
    ]);
  }
  scene.annotation(`slope = ${fit.slope.toPrecision(12)}`);
  scene.annotation(`r_squared = ${fit.rSquared.toPrecision(8)}`, 1);
  return { svg: scene.render(), fit };
}

function renderEnvelope(spec: FigureSpec): string {
  const doc = JSON.parse(readFileSync(spec.input, "utf-8"));
  for (const key of ["params", "fitted_constant", "per_mode", "t_final"]) {
    if (!(key in doc)) {
      throw new SchemaError(`envelope report is missing '${key}'`);
    }
  }
  const params: ManifestParams = spec.manifest
    ? loadManifestParams(spec.manifest)
    : {
        nu: doc.params.nu,
        mu: doc.params.mu,
        delta0: doc.params.delta0,
        regime: doc.params.regime,
      };
  const tPeaks = doc.per_mode.map((m: any) => m.t_peak as number);
  const ratios = doc.per_mode.map((m: any) => m.peak_ratio as number);
  const tf = doc.t_final as number;
  const c = doc.fitted_constant as number;
  const yExt = extent([...ratios, c, 0, 1]);
  const scene = new Scene(
    { min: 0, max: tf },
    { min: 0, max: yExt.max * 1.1 },
    spec.title ?? "transient amplification vs envelope",
    "t of peak ratio",
    "peak |state| / envelope",
  );
  scene.markers(tPeaks, ratios, PALETTE[0]);
  scene.polyline([0, tf], [c, c], PALETTE[1], "6,3");
  // normalized envelope shape from the manifest parameters
  const ts: number[] = [];
  const vs: number[] = [];
  let envMax = -Infinity;
  for (let i = 0; i <= 200; i++) {
    const t = (i / 200) * tf;
    envMax = Math.max(envMax, envelopeLog(params, t));
  }
  for (let i = 0; i <= 200; i++) {
    const t = (i / 200) * tf;
    ts.push(t);
    vs.push(Math.exp(envelopeLog(params, t) - envMax) * c);
  }
  scene.polyline(ts, vs, PALETTE[2], "2,3");
  scene.legend([
    ["per-mode peak ratios", PALETTE[0]],
    ["fitted constant", PALETTE[1]],
    ["envelope shape (manifest)", PALETTE[2]],
  ]);
  scene.annotation(`fitted constant C = ${c.toPrecision(12)}`);
  scene.annotation(`regime = ${params.regime}`, 1);
  return scene.render();
}

export interface ScalingResult {
  svg: string;
  gamma1: number;
  gamma2: number;
}

export function scalingFigure(spec: FigureSpec): ScalingResult {
  const doc = JSON.parse(readFileSync(spec.input, "utf-8"));
  for (const key of ["points", "scaling_fits"]) {
    if (!(key in doc)) {
      throw new SchemaError(`sweep report is missing '${key}'`);
    }
  }
  const regime =
    spec.regime ??
    Object.keys(doc.scaling_fits).find(
      (r) => doc.scaling_fits[r].flagged == null,
    );
  if (!regime || !(regime in doc.scaling_fits)) {
    throw new SchemaError(`no usable scaling fit for regime '${regime}'`);
  }
  const fit = doc.scaling_fits[regime];
  const pts = doc.points.filter(
    (p: any) => p.regime === regime && p.saturated == null && p.eps_star > 0,
  );
  const xs = pts.map((p: any) => Math.log(p.nu));
  const ys = pts.map((p: any) => Math.log(p.eps_star));
  const scene = new Scene(
    extent(xs.length ? xs : [0, 1]),
    extent(ys.length ? ys : [0, 1]),
    spec.title ?? `threshold scaling, ${regime}`,
    "log nu",
    "log eps*",
  );
  scene.markers(xs, ys, PALETTE[0], 4);
  // fitted plane sliced at the median mu
  if (pts.length >= 2) {
    const mus = pts.map((p: any) => Math.log(p.mu)).sort((a: number, b: number) => a - b);
    const muMed = mus[Math.floor(mus.length / 2)];
    const xe = extent(xs);
    scene.polyline(
      [xe.min, xe.max],
      [
        fit.intercept + fit.gamma1 * xe.min + fit.gamma2 * muMed,
        fit.intercept + fit.gamma1 * xe.max + fit.gamma2 * muMed,
      ],
      PALETTE[1],
      "6,3",
    );
  }
  scene.annotation(`gamma1 = ${Number(fit.gamma1).toPrecision(12)}`);
  scene.annotation(`gamma2 = ${Number(fit.gamma2).toPrecision(12)}`, 1);
  scene.annotation(
    `ci95 gamma1 = [${fmt(fit.ci95_gamma1[0], 6)}, ${fmt(fit.ci95_gamma1[1], 6)}]`,
    2,
  );
  scene.annotation(
    `ci95 gamma2 = [${fmt(fit.ci95_gamma2[0], 6)}, ${fmt(fit.ci95_gamma2[1], 6)}]`,
    3,
  );
  scene.annotation(`predicted: ${fit.predicted.form}`, 4);
  return { svg: scene.render(), gamma1: fit.gamma1, gamma2: fit.gamma2 };
}

// ---------------------------------------------------------------------------

export function render(spec: FigureSpec): string {
  let svg: string;
  switch (spec.kind) {
    case "multiplier":
      svg = renderMultiplier(spec);
      break;
    case "decay":
      svg = decayFigure(spec).svg;
      break;
    case "envelope":
      svg = renderEnvelope(spec);
      break;
    case "scaling":
      svg = scalingFigure(spec).svg;
      break;
    default:
      throw new SchemaError(`unknown figure kind '${(spec as any).kind}'`);
  }
  writeFileSync(spec.output, svg);
  return spec.output;
}
