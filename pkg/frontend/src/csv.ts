// Strict RFC-4180 reader for the experiment artifacts: CRLF records,
// optional quoting, first record is the header.

export interface Table {
  header: string[]
  rows: string[][]
}

export function parseCsv(text: string): Table {
  const records: string[][] = []
  let field = ''
  let record: string[] = []
  let inQuotes = false
  let i = 0
  const push = () => {
    record.push(field)
    field = ''
  }
  const endRecord = () => {
    push()
    records.push(record)
    record = []
  }
  while (i < text.length) {
    const c = text[i]
    if (inQuotes) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"'
          i += 2
          continue
        }
        inQuotes = false
        i++
        continue
      }
      field += c
      i++
      continue
    }
    if (c === '"') {
      inQuotes = true
      i++
    } else if (c === ',') {
      push()
      i++
    } else if (c === '\r' && text[i + 1] === '\n') {
      endRecord()
      i += 2
    } else if (c === '\n') {
      endRecord()
      i++
    } else {
      field += c
      i++
    }
  }
  if (field.length > 0 || record.length > 0) endRecord()
  if (records.length === 0) throw new Error('empty CSV')
  const [header, ...rows] = records
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(`ragged CSV row: expected ${header.length} fields, got ${row.length}`)
    }
  }
  return { header, rows }
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name)
  if (idx < 0) throw new Error(`missing column ${name}`)
  return table.rows.map((row) => {
    const value = Number(row[idx])
    if (!Number.isFinite(value)) throw new Error(`non-numeric value in ${name}: ${row[idx]}`)
    return value
  })
}
