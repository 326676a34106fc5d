/** SVG helpers for the width-trend sparkline and the interval band. */

export function widthSparkline(values: number[], w = 140, h = 30): string {
  if (values.length < 2) return '';
  const min = Math.min(...values);
  const max = Math.max(...values);
  const range = max - min || 1;
  const points = values
    .map((v, i) => {
      const x = (i / (values.length - 1)) * (w - 2) + 1;
      const y = h - 2 - ((v - min) / range) * (h - 4);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(' ');
  return (
    `<svg class="sparkline" width="${w}" height="${h}" viewBox="0 0 ${w} ${h}" ` +
    `role="img" aria-label="interval width trend">` +
    `<polyline points="${points}" fill="none" stroke="currentColor" ` +
    `stroke-width="1.5" stroke-linecap="round" stroke-linejoin="round"/></svg>`
  );
}

/** Pixel width of the interval band: strictly monotone in the numeric width.
 * The scale is presentational (relative to the widest interval seen), but the
 * ordering of band sizes always matches the ordering of the real widths. */
export function bandPixels(width: number, maxWidth: number, plot = 260): number {
  if (width < 0 || maxWidth <= 0) return 0;
  return (width / Math.max(maxWidth, width)) * plot;
}

export function intervalBand(width: number, maxWidth: number, plot = 260): string {
  const w = bandPixels(width, maxWidth, plot);
  const x = (plot - w) / 2;
  return (
    `<svg class="band" width="${plot}" height="18" viewBox="0 0 ${plot} 18" ` +
    `role="img" aria-label="prediction interval band">` +
    `<line x1="0" y1="9" x2="${plot}" y2="9" stroke="#ccc" stroke-width="1"/>` +
    `<rect x="${x.toFixed(1)}" y="4" width="${w.toFixed(1)}" height="10" rx="3" ` +
    `fill="currentColor" opacity="0.35"/>` +
    `<line x1="${plot / 2}" y1="2" x2="${plot / 2}" y2="16" ` +
    `stroke="currentColor" stroke-width="2"/></svg>`
  );
}
