/** Pure view-model for rendering a puzzle document; no DOM access here. */
import { PuzzleDocument, PuzzleEntry } from "./types";

export interface CellView {
  row: number;
  col: number;
  blocked: boolean;
  letter: string | null;
  number: number | null;
}

export interface GridView {
  width: number;
  height: number;
  cells: CellView[][];
  across: PuzzleEntry[];
  down: PuzzleEntry[];
}

export function buildGridView(doc: PuzzleDocument): GridView {
  const cells: CellView[][] = [];
  for (let row = 0; row < doc.height; row += 1) {
    const rowCells: CellView[] = [];
    const rowLetters = [...(doc.cells[row] ?? "")];
    const rowNumbers = doc.numbers[row] ?? [];
    for (let col = 0; col < doc.width; col += 1) {
      const raw = rowLetters[col] ?? ".";
      const num = rowNumbers[col] ?? 0;
      rowCells.push({
        row,
        col,
        blocked: raw === ".",
        letter: raw === "." ? null : raw,
        number: num > 0 ? num : null,
      });
    }
    cells.push(rowCells);
  }
  return {
    width: doc.width,
    height: doc.height,
    cells,
    across: [...doc.across].sort((a, b) => a.num - b.num),
    down: [...doc.down].sort((a, b) => a.num - b.num),
  };
}

/**
 * Cross-check a built view against its document: every entry must start at
 * the cell carrying its number and spell its answer in its direction.
 * Returns human-readable problems; empty means the numbering matches.
 */
export function numberingProblems(doc: PuzzleDocument): string[] {
  const view = buildGridView(doc);
  const problems: string[] = [];
  const starts = new Map<number, CellView>();
  for (const row of view.cells) {
    for (const cell of row) {
      if (cell.number !== null) {
        if (starts.has(cell.number)) {
          problems.push(`number ${cell.number} appears twice`);
        }
        starts.set(cell.number, cell);
      }
    }
  }
  const walk = (entry: PuzzleEntry, dr: number, dc: number): void => {
    const start = starts.get(entry.num);
    if (!start) {
      problems.push(`entry ${entry.num} has no numbered cell`);
      return;
    }
    let spelled = "";
    for (let i = 0; i < entry.len; i += 1) {
      const cell = view.cells[start.row + dr * i]?.[start.col + dc * i];
      if (!cell || cell.blocked) {
        problems.push(`entry ${entry.num} (${entry.answer}) leaves the grid`);
        return;
      }
      spelled += cell.letter ?? "";
    }
    if (spelled !== entry.answer) {
      problems.push(
        `entry ${entry.num} spells ${spelled}, document says ${entry.answer}`
      );
    }
  };
  for (const entry of view.across) walk(entry, 0, 1);
  for (const entry of view.down) walk(entry, 1, 0);
  for (const [num] of starts) {
    const opensEntry =
      view.across.some((e) => e.num === num) ||
      view.down.some((e) => e.num === num);
    if (!opensEntry) {
      problems.push(`numbered cell ${num} opens no entry`);
    }
  }
  return problems;
}
