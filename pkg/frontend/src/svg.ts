// Minimal deterministic SVG chart primitives: no DOM, plain string assembly.

export interface Frame {
  width: number
  height: number
  margin: { top: number; right: number; bottom: number; left: number }
}

export const DEFAULT_FRAME: Frame = {
  width: 860,
  height: 480,
  margin: { top: 36, right: 24, bottom: 52, left: 64 },
}

export const PALETTE = ['#444444', '#b22222', '#1f6fb2', '#2e8b57', '#b8860b', '#6a3d9a']

export function scaleLinear(d0: number, d1: number, r0: number, r1: number) {
  const span = d1 - d0 || 1
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0)
}

export function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1
  const step = Math.pow(10, Math.floor(Math.log10(span / count)))
  const err = span / count / step
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1
  const s = mult * step
  const start = Math.ceil(lo / s) * s
  const ticks: number[] = []
  for (let v = start; v <= hi + 1e-9 * span; v += s) ticks.push(Number(v.toFixed(10)))
  return ticks
}

const fmt = (v: number) => (Math.abs(v) < 1e-12 ? '0' : String(Number(v.toPrecision(6))))

export function polyline(xs: number[], ys: number[], color: string, width = 1.5): string {
  const pts = xs.map((x, i) => `${x.toFixed(2)},${ys[i].toFixed(2)}`).join(' ')
  return `<polyline fill="none" stroke="${color}" stroke-width="${width}" points="${pts}"/>`
}

export function axes(
  frame: Frame,
  xlo: number,
  xhi: number,
  ylo: number,
  yhi: number,
  xlabel: string,
  ylabel: string,
): { body: string; sx: (v: number) => number; sy: (v: number) => number } {
  const { width, height, margin } = frame
  const sx = scaleLinear(xlo, xhi, margin.left, width - margin.right)
  const sy = scaleLinear(ylo, yhi, height - margin.bottom, margin.top)
  const parts: string[] = []
  parts.push(
    `<rect x="${margin.left}" y="${margin.top}" width="${width - margin.left - margin.right}" ` +
      `height="${height - margin.top - margin.bottom}" fill="none" stroke="#999"/>`,
  )
  for (const t of niceTicks(xlo, xhi)) {
    const x = sx(t)
    parts.push(`<line x1="${x.toFixed(2)}" y1="${height - margin.bottom}" x2="${x.toFixed(2)}" y2="${height - margin.bottom + 5}" stroke="#666"/>`)
    parts.push(`<text x="${x.toFixed(2)}" y="${height - margin.bottom + 18}" font-size="11" text-anchor="middle" fill="#333">${fmt(t)}</text>`)
  }
  for (const t of niceTicks(ylo, yhi)) {
    const y = sy(t)
    parts.push(`<line x1="${margin.left - 5}" y1="${y.toFixed(2)}" x2="${margin.left}" y2="${y.toFixed(2)}" stroke="#666"/>`)
    parts.push(`<text x="${margin.left - 8}" y="${(y + 4).toFixed(2)}" font-size="11" text-anchor="end" fill="#333">${fmt(t)}</text>`)
  }
  parts.push(
    `<text x="${(margin.left + width - margin.right) / 2}" y="${height - 14}" font-size="13" text-anchor="middle" fill="#111">${xlabel}</text>`,
  )
  parts.push(
    `<text x="18" y="${(margin.top + height - margin.bottom) / 2}" font-size="13" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${(margin.top + height - margin.bottom) / 2})" fill="#111">${ylabel}</text>`,
  )
  return { body: parts.join('\n'), sx, sy }
}

export function legend(frame: Frame, entries: { label: string; color: string }[]): string {
  const parts: string[] = []
  let x = frame.margin.left + 10
  const y = frame.margin.top + 16
  for (const { label, color } of entries) {
    parts.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${color}" stroke-width="2.5"/>`)
    parts.push(`<text x="${x + 27}" y="${y}" font-size="12" fill="#111">${label}</text>`)
    x += 34 + label.length * 7
  }
  return parts.join('\n')
}

export function document(frame: Frame, title: string, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" ` +
    `viewBox="0 0 ${frame.width} ${frame.height}">\n` +
    `<rect width="100%" height="100%" fill="white"/>\n` +
    `<text x="${frame.width / 2}" y="20" font-size="14" text-anchor="middle" fill="#111">${title}</text>\n` +
    body +
    '\n</svg>\n'
  )
}
