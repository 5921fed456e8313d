// CLI: plot an experiment directory.
//   dpdlab-plot <experiment_dir> [--out DIR] [--fmt svg]

import { mkdirSync, readFileSync, readdirSync, writeFileSync } from 'fs'
import { basename, join } from 'path'
import { parseCsv, Table } from './csv.js'
import { renderEvmBars, renderPsdOverlay, Rendered } from './render.js'

interface Args {
  inputDir: string
  outDir: string
  formats: string[]
}

export function parseArgs(argv: string[]): Args {
  const positional: string[] = []
  let outDir: string | null = null
  let formats = ['svg']
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i]
    if (a === '--out') outDir = argv[++i]
    else if (a === '--fmt') formats = argv[++i].split(',').map((f) => f.trim())
    else positional.push(a)
  }
  if (positional.length !== 1) {
    throw new Error('usage: dpdlab-plot <experiment_dir> [--out DIR] [--fmt svg]')
  }
  for (const f of formats) {
    if (f === 'png') throw new Error('png output is not supported; use --fmt svg')
    if (f !== 'svg') throw new Error(`unknown format: ${f}`)
  }
  return { inputDir: positional[0], outDir: outDir ?? join(positional[0], 'plots'), formats }
}

function readTable(dir: string, name: string): Table {
  let text: string
  try {
    text = readFileSync(join(dir, name), 'utf8')
  } catch {
    throw new Error(`missing or unreadable file: ${name}`)
  }
  try {
    return parseCsv(text)
  } catch (err) {
    throw new Error(`ill-formed CSV ${name}: ${(err as Error).message}`)
  }
}

function write(outDir: string, name: string, rendered: Rendered) {
  writeFileSync(join(outDir, name), rendered.svg)
  writeFileSync(join(outDir, `${name}.manifest.json`), JSON.stringify(rendered.manifest, null, 1))
}

export function plotExperiment(args: Args): string[] {
  const { inputDir, outDir } = args
  mkdirSync(outDir, { recursive: true })
  const files = readdirSync(inputDir)
  const input = readTable(inputDir, 'psd_input.csv')
  const nodpd = readTable(inputDir, 'psd_nodpd.csv')

  const written: string[] = []
  const schemes = files
    .filter((f) => f.startsWith('psd_') && f.endsWith('.csv'))
    .map((f) => basename(f, '.csv').slice('psd_'.length))
    .filter((name) => name !== 'input' && name !== 'nodpd')
    .sort()

  // full and single share a panel, like the per-amplifier vs one-for-all
  // comparison they represent; every other scheme gets its own overlay
  const panels: { title: string; names: string[] }[] = []
  if (schemes.includes('full') && schemes.includes('single')) {
    panels.push({ title: 'full and single', names: ['full', 'single'] })
  }
  for (const algo of schemes) {
    if (panels.length > 0 && panels[0].names.includes(algo)) continue
    panels.push({ title: algo, names: [algo] })
  }

  if (panels.length === 0) {
    const name = 'psd_baseline.svg'
    write(outDir, name, renderPsdOverlay('baseline', input, nodpd, [], name))
    written.push(name)
  }
  for (const panel of panels) {
    const tables = panel.names.map((n) => ({ name: n, table: readTable(inputDir, `psd_${n}.csv`) }))
    const name = `psd_${panel.names.join('_')}.svg`
    write(outDir, name, renderPsdOverlay(panel.title, input, nodpd, tables, name))
    written.push(name)
  }

  const summary = readTable(inputDir, 'summary.csv')
  if (summary.rows.length > 0) {
    const name = 'evm_bars.svg'
    write(outDir, name, renderEvmBars(summary, name))
    written.push(name)
  }
  return written
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(basename(process.argv[1]))

if (invokedDirectly) {
  try {
    const args = parseArgs(process.argv.slice(2))
    const written = plotExperiment(args)
    for (const name of written) console.log(`wrote ${join(args.outDir, name)}`)
  } catch (err) {
    console.error((err as Error).message)
    process.exit(1)
  }
}
