// Color encodings. Pure functions of the value and the documented scale so
// the mappings are snapshot-testable.

/** Clamp to [lo, hi]. */
export function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

const POSITIVE_HUE = 0; // red: market convention for gains
const NEGATIVE_HUE = 130; // green: losses
export const NEUTRAL_RETURN_COLOR = "hsl(0, 0%, 78%)";

/**
 * Diverging return color centered at zero: red for positive, green for
 * negative, gray at zero. `extent` is the largest |return| in the view.
 */
export function returnColor(value: number, extent: number): string {
  if (value === 0 || extent <= 0) return NEUTRAL_RETURN_COLOR;
  const t = clamp(Math.abs(value) / extent, 0, 1);
  const hue = value > 0 ? POSITIVE_HUE : NEGATIVE_HUE;
  const saturation = Math.round(15 + 75 * t);
  const lightness = Math.round(82 - 38 * t);
  return `hsl(${hue}, ${saturation}%, ${lightness}%)`;
}

const CORR_POSITIVE_HUE = 4; // red
const CORR_NEGATIVE_HUE = 216; // blue

/**
 * Correlation cell color: red for positive rho, blue for negative, with
 * saturation proportional to |rho|.
 */
export function correlationColor(rho: number): string {
  const hue = rho >= 0 ? CORR_POSITIVE_HUE : CORR_NEGATIVE_HUE;
  const saturation = Math.round(100 * clamp(Math.abs(rho), 0, 1));
  const lightness = Math.round(92 - 40 * clamp(Math.abs(rho), 0, 1));
  return `hsl(${hue}, ${saturation}%, ${lightness}%)`;
}

/** Hue component of an hsl() string; NaN when unparseable. */
export function hslHue(color: string): number {
  const match = /^hsl\((-?\d+(?:\.\d+)?),/.exec(color);
  return match ? Number(match[1]) : NaN;
}

/** Sign of the hue encoding: +1 red family, -1 blue/green family, 0 neutral. */
export function hueSign(color: string): number {
  const hue = hslHue(color);
  if (Number.isNaN(hue)) return 0;
  const saturation = Number(/,\s*(\d+)%/.exec(color)?.[1] ?? "0");
  if (saturation === 0) return 0;
  return hue < 90 ? 1 : -1;
}

/** Exposure radius for the factor signature: [-3, +3] onto [inner, outer]. */
export function signatureRadius(value: number, inner: number, outer: number): number {
  const clipped = clamp(value, -3, 3);
  return inner + ((clipped + 3) / 6) * (outer - inner);
}

export function wasClipped(value: number): boolean {
  return value < -3 || value > 3;
}
