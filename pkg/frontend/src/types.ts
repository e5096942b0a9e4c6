/** Zod schemas for the service's published JSON shapes. Every payload is
 * validated against these before anything is rendered. */
import { z } from "zod";

export const CandidateSchema = z.object({
  id: z.string(),
  answer: z.string(),
  clue: z.string(),
  provider_id: z.string(),
  created_at: z.string(),
  rating: z.unknown().nullable().optional(),
});

export const PuzzleEntrySchema = z.object({
  num: z.number().int().positive(),
  clue: z.string(),
  answer: z.string(),
  len: z.number().int().positive(),
});

export const PuzzleDocumentSchema = z.object({
  width: z.number().int().positive(),
  height: z.number().int().positive(),
  cells: z.array(z.string()),
  numbers: z.array(z.array(z.number().int().nonnegative())),
  across: z.array(PuzzleEntrySchema),
  down: z.array(PuzzleEntrySchema),
});

export const SessionSchema = z.object({
  id: z.string(),
  created_at: z.string(),
  version: z.number().int(),
  status: z.enum(["draft", "clues_ready", "generated"]),
  inputs: z.array(
    z.object({
      answer: z.string(),
      text: z.string().nullable(),
      category: z.string().nullable(),
      n: z.number().int(),
    })
  ),
  candidates: z.array(CandidateSchema),
  failures: z.array(
    z.object({ answer: z.string(), code: z.string(), message: z.string() })
  ),
  selections: z.record(z.string(), z.string()),
  puzzle: PuzzleDocumentSchema.nullable(),
  generation: z.object({
    state: z.enum(["none", "running", "failed"]),
    reason: z.string().nullable(),
    error: z.unknown().nullable(),
  }),
});

export const ApiErrorSchema = z.object({
  code: z.string(),
  message: z.string(),
  details: z.unknown(),
});

export type Candidate = z.infer<typeof CandidateSchema>;
export type PuzzleEntry = z.infer<typeof PuzzleEntrySchema>;
export type PuzzleDocument = z.infer<typeof PuzzleDocumentSchema>;
export type Session = z.infer<typeof SessionSchema>;

export interface ClueInput {
  answer: string;
  text?: string | null;
  category?: string | null;
  n?: number;
}

export interface GenOverrides {
  width?: number;
  height?: number;
  seed?: number;
  min_words?: number;
  target_fill_ratio?: number;
}
