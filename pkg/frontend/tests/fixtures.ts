import { PuzzleDocument, Session } from "../src/types";

export function samplePuzzle(): PuzzleDocument {
  // KEDİ across at (0,0), EV down at (0,1)
  return {
    width: 5,
    height: 5,
    cells: ["KEDİ.", ".V...", ".....", ".....", "....."],
    numbers: [
      [1, 2, 0, 0, 0],
      [0, 0, 0, 0, 0],
      [0, 0, 0, 0, 0],
      [0, 0, 0, 0, 0],
      [0, 0, 0, 0, 0],
    ],
    across: [{ num: 1, clue: "Miyavlayan hayvan", answer: "KEDİ", len: 4 }],
    down: [{ num: 2, clue: "İçinde oturulan yer", answer: "EV", len: 2 }],
  };
}

export function sampleSession(overrides: Partial<Session> = {}): Session {
  const base: Session = {
    id: "a".repeat(32),
    created_at: "2025-01-01T00:00:00+00:00",
    version: 2,
    status: "clues_ready",
    inputs: [
      { answer: "KEDİ", text: null, category: null, n: 3 },
      { answer: "EV", text: null, category: null, n: 3 },
    ],
    candidates: [
      {
        id: "c1",
        answer: "KEDİ",
        clue: "Miyavlayan hayvan",
        provider_id: "mock",
        created_at: "2025-01-01T00:00:01+00:00",
        rating: null,
      },
      {
        id: "c2",
        answer: "KEDİ",
        clue: "Fareleri kovalar",
        provider_id: "mock",
        created_at: "2025-01-01T00:00:01+00:00",
        rating: null,
      },
      {
        id: "c3",
        answer: "EV",
        clue: "İçinde oturulan yer",
        provider_id: "mock",
        created_at: "2025-01-01T00:00:01+00:00",
        rating: null,
      },
    ],
    failures: [],
    selections: {},
    puzzle: null,
    generation: { state: "none", reason: null, error: null },
  };
  return { ...base, ...overrides };
}
