// Pure views of the experiment CSVs: every plotted number goes verbatim into
// a manifest next to the image, so tests can diff them against the files.

import { Table, numericColumn } from './csv.js'
import { DEFAULT_FRAME, PALETTE, axes, document as svgDocument, legend, polyline } from './svg.js'

export interface Series {
  name: string
  x: number[]
  y: number[]
}

export interface Manifest {
  image: string
  kind: 'psd-overlay' | 'evm-bars'
  series: Series[]
}

export interface Rendered {
  svg: string
  manifest: Manifest
}

export function renderPsdOverlay(
  title: string,
  input: Table,
  nodpd: Table,
  schemes: { name: string; table: Table }[],
  imageName: string,
): Rendered {
  const series: Series[] = [
    { name: 'input', x: numericColumn(input, 'frequency_hz'), y: numericColumn(input, 'power_db') },
    { name: 'no-dpd', x: numericColumn(nodpd, 'frequency_hz'), y: numericColumn(nodpd, 'power_db') },
  ]
  for (const { name, table } of schemes) {
    series.push({
      name,
      x: numericColumn(table, 'frequency_hz'),
      y: numericColumn(table, 'power_db'),
    })
  }
  const xs = series.flatMap((s) => s.x)
  const ys = series.flatMap((s) => s.y)
  const xlo = Math.min(...xs) / 1e6
  const xhi = Math.max(...xs) / 1e6
  const ylo = Math.max(Math.min(...ys), -140)
  const yhi = Math.max(...ys, 5)
  const frame = DEFAULT_FRAME
  const { body, sx, sy } = axes(frame, xlo, xhi, ylo, yhi, 'frequency (MHz)', 'normalized PSD (dB)')
  const parts = [body]
  // 0 dB in-band reference
  parts.push(
    `<line x1="${frame.margin.left}" y1="${sy(0).toFixed(2)}" x2="${frame.width - frame.margin.right}" ` +
      `y2="${sy(0).toFixed(2)}" stroke="#aaa" stroke-dasharray="5,4"/>`,
  )
  series.forEach((s, i) => {
    parts.push(
      polyline(
        s.x.map((v) => sx(v / 1e6)),
        s.y.map((v) => sy(Math.max(v, ylo))),
        PALETTE[i % PALETTE.length],
      ),
    )
  })
  parts.push(legend(frame, series.map((s, i) => ({ label: s.name, color: PALETTE[i % PALETTE.length] }))))
  const svg = svgDocument(frame, `spectrum: ${title}`, parts.join('\n'))
  return { svg, manifest: { image: imageName, kind: 'psd-overlay', series } }
}

export function renderEvmBars(summary: Table, imageName: string): Rendered {
  const algoIdx = summary.header.indexOf('algorithm')
  if (algoIdx < 0) throw new Error('summary.csv lacks an algorithm column')
  const paColumns = summary.header.filter((h) => h.startsWith('evm_percent_pa_'))
  if (paColumns.length === 0) throw new Error('summary.csv lacks per-amplifier EVM columns')
  const series: Series[] = summary.rows.map((row) => ({
    name: row[algoIdx],
    x: paColumns.map((_, i) => i + 1),
    y: paColumns.map((c) => {
      const v = Number(row[summary.header.indexOf(c)])
      if (!Number.isFinite(v)) throw new Error(`non-numeric EVM for ${row[algoIdx]}`)
      return v
    }),
  }))

  const frame = DEFAULT_FRAME
  const paCount = paColumns.length
  const yhi = Math.max(...series.flatMap((s) => s.y)) * 1.1
  const { body, sy } = axes(frame, 0.5, paCount + 0.5, 0, yhi, 'amplifier', 'EVM (%)')
  const parts = [body]
  const inner = frame.width - frame.margin.left - frame.margin.right
  const groupWidth = inner / paCount
  const barWidth = (groupWidth * 0.8) / Math.max(series.length, 1)
  series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length]
    s.y.forEach((v, pi) => {
      const x = frame.margin.left + pi * groupWidth + groupWidth * 0.1 + si * barWidth
      const y = sy(v)
      const h = frame.height - frame.margin.bottom - y
      parts.push(
        `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${barWidth.toFixed(2)}" ` +
          `height="${Math.max(h, 0).toFixed(2)}" fill="${color}"/>`,
      )
    })
  })
  parts.push(legend(frame, series.map((s, i) => ({ label: s.name, color: PALETTE[i % PALETTE.length] }))))
  const svg = svgDocument(frame, 'per-amplifier EVM', parts.join('\n'))
  return { svg, manifest: { image: imageName, kind: 'evm-bars', series } }
}
