/** Least-squares fit of log(y) = intercept + slope * x; R^2 in log space. */

export interface ExponentialFit {
  slope: number;
  intercept: number;
  rSquared: number;
  n: number;
}

export function fitLogLinear(x: number[], y: number[]): ExponentialFit {
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < x.length; i++) {
    if (Number.isFinite(x[i]) && y[i] > 0 && Number.isFinite(y[i])) {
      pts.push([x[i], Math.log(y[i])]);
    }
  }
  const n = pts.length;
  if (n < 2) {
    throw new Error(`need at least 2 positive samples to fit, got ${n}`);
  }
  let sx = 0;
  let sy = 0;
  let sxx = 0;
  let sxy = 0;
  for (const [xi, yi] of pts) {
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
  }
  const denom = n * sxx - sx * sx;
  if (Math.abs(denom) < 1e-300) {
    throw new Error("degenerate abscissa: all x equal");
  }
  const slope = (n * sxy - sx * sy) / denom;
  const intercept = (sy - slope * sx) / n;
  const meanY = sy / n;
  let ssTot = 0;
  let ssRes = 0;
  for (const [xi, yi] of pts) {
    ssTot += (yi - meanY) ** 2;
    ssRes += (yi - (intercept + slope * xi)) ** 2;
  }
  const rSquared = ssTot > 0 ? Math.max(0, 1 - ssRes / ssTot) : 1;
  return { slope, intercept, rSquared, n };
}
