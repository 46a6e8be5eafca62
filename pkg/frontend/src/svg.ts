/**
 * Deterministic SVG rendering of power-versus-runtime curves:
 * log-scaled runtime on x, rejection rate with Wilson error bars on y.
 * Identical inputs produce byte-identical output.
 */

import { CurveSeries } from "./series";

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { left: 64, right: 180, top: 48, bottom: 56 };

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

function fmt(value: number): string {
  // fixed-precision coordinates keep output byte-stable
  return value.toFixed(2);
}

export function renderSvg(series: CurveSeries[], title: string): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  const runtimes = series.flatMap((s) => s.points.map((p) => p.runtimeNs));
  let logMin = Math.floor(Math.log10(Math.min(...runtimes)));
  let logMax = Math.ceil(Math.log10(Math.max(...runtimes)));
  if (logMax === logMin) {
    logMax = logMin + 1;
  }
  const sx = (ns: number) =>
    MARGIN.left + ((Math.log10(ns) - logMin) / (logMax - logMin)) * plotW;
  const sy = (rate: number) => MARGIN.top + (1 - rate) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">${escapeXml(title)}</text>`,
  );

  // axes
  parts.push(`<g class="axes" stroke="#333" fill="none">`);
  parts.push(`<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${MARGIN.top + plotH}"/>`);
  parts.push(`<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" y2="${MARGIN.top + plotH}"/>`);
  parts.push(`</g>`);
  parts.push(`<g class="ticks" font-family="sans-serif" font-size="11" fill="#333">`);
  for (let e = logMin; e <= logMax; e++) {
    const x = sx(10 ** e);
    parts.push(`<line x1="${fmt(x)}" y1="${MARGIN.top + plotH}" x2="${fmt(x)}" y2="${MARGIN.top + plotH + 5}" stroke="#333"/>`);
    parts.push(`<text x="${fmt(x)}" y="${MARGIN.top + plotH + 20}" text-anchor="middle">1e${e}</text>`);
  }
  for (let r = 0; r <= 10; r += 2) {
    const y = sy(r / 10);
    parts.push(`<line x1="${MARGIN.left - 5}" y1="${fmt(y)}" x2="${MARGIN.left}" y2="${fmt(y)}" stroke="#333"/>`);
    parts.push(`<text x="${MARGIN.left - 9}" y="${fmt(y + 4)}" text-anchor="end">${(r / 10).toFixed(1)}</text>`);
  }
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle">runtime (ns, log scale)</text>`);
  parts.push(`<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">rejection rate</text>`);
  parts.push(`</g>`);

  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    parts.push(`<g class="series" data-label="${escapeXml(s.label)}" stroke="${color}" fill="${color}">`);
    if (s.points.length > 1) {
      const path = s.points
        .map((p, i) => `${i === 0 ? "M" : "L"}${fmt(sx(p.runtimeNs))} ${fmt(sy(p.rate))}`)
        .join(" ");
      parts.push(`<path class="curve" d="${path}" fill="none" stroke-width="1.5"/>`);
    }
    for (const p of s.points) {
      const x = fmt(sx(p.runtimeNs));
      parts.push(
        `<line class="errorbar" x1="${x}" y1="${fmt(sy(p.wilsonLo))}" x2="${x}" y2="${fmt(sy(p.wilsonHi))}" stroke-width="1"/>`,
      );
      parts.push(
        `<circle class="point" cx="${x}" cy="${fmt(sy(p.rate))}" r="3.5"><title>${escapeXml(`${s.label} ${p.label}`.trim())}</title></circle>`,
      );
    }
    parts.push(`</g>`);
  });

  // legend
  parts.push(`<g class="legend" font-family="sans-serif" font-size="12">`);
  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const y = MARGIN.top + 16 * idx;
    parts.push(`<rect x="${WIDTH - MARGIN.right + 12}" y="${y - 9}" width="10" height="10" fill="${color}"/>`);
    parts.push(`<text x="${WIDTH - MARGIN.right + 28}" y="${y}" fill="#111">${escapeXml(s.label)}</text>`);
  });
  parts.push(`</g>`);
  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
