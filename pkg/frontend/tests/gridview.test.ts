import { describe, expect, it } from "vitest";

import { buildGridView, numberingProblems } from "../src/gridview";
import { samplePuzzle } from "./fixtures";

describe("buildGridView", () => {
  it("marks empty cells as blocked", () => {
    const view = buildGridView(samplePuzzle());
    expect(view.cells[0]![4]!.blocked).toBe(true);
    expect(view.cells[2]![2]!.blocked).toBe(true);
    expect(view.cells[0]![0]!.blocked).toBe(false);
  });

  it("exposes letters and numbers from the document", () => {
    const view = buildGridView(samplePuzzle());
    expect(view.cells[0]!.map((c) => c.letter).join("")).toBe("KEDİ");
    expect(view.cells[0]![0]!.number).toBe(1);
    expect(view.cells[0]![1]!.number).toBe(2);
    expect(view.cells[1]![1]!.letter).toBe("V");
    expect(view.cells[1]![1]!.number).toBeNull();
  });

  it("sorts clue lists by number", () => {
    const doc = samplePuzzle();
    doc.across.push({ num: 9, clue: "x", answer: "Y", len: 1 });
    const view = buildGridView(doc);
    expect(view.across.map((e) => e.num)).toEqual([1, 9]);
  });
});

describe("numberingProblems", () => {
  it("accepts a consistent document", () => {
    expect(numberingProblems(samplePuzzle())).toEqual([]);
  });

  it("detects an entry that does not spell its answer", () => {
    const doc = samplePuzzle();
    doc.across[0] = { ...doc.across[0]!, answer: "KEDA" };
    expect(numberingProblems(doc).length).toBeGreaterThan(0);
  });

  it("detects a missing numbered cell", () => {
    const doc = samplePuzzle();
    doc.numbers[0]![1] = 0;
    expect(numberingProblems(doc)).toContain("entry 2 has no numbered cell");
  });

  it("detects a numbered cell that opens nothing", () => {
    const doc = samplePuzzle();
    doc.numbers[4]![4] = 7;
    expect(numberingProblems(doc)).toContain("numbered cell 7 opens no entry");
  });
});
