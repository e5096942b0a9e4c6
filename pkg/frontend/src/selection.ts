/** Clue-review state: per answer, exactly one chosen candidate or an
 * explicit exclusion. Excluded answers are omitted from generation. */
import { Candidate, Session } from "./types";

export type Choice =
  | { kind: "chosen"; candidateId: string }
  | { kind: "excluded" };

export class SelectionState {
  readonly answers: string[];
  private byAnswer = new Map<string, Candidate[]>();
  private choices = new Map<string, Choice>();

  constructor(session: Session) {
    this.answers = [];
    for (const candidate of session.candidates) {
      const group = this.byAnswer.get(candidate.answer);
      if (group) {
        group.push(candidate);
      } else {
        this.byAnswer.set(candidate.answer, [candidate]);
        this.answers.push(candidate.answer);
      }
    }
  }

  candidatesFor(answer: string): Candidate[] {
    return this.byAnswer.get(answer) ?? [];
  }

  choiceFor(answer: string): Choice | undefined {
    return this.choices.get(answer);
  }

  choose(answer: string, candidateId: string): void {
    const valid = this.candidatesFor(answer).some((c) => c.id === candidateId);
    if (!valid) {
      throw new Error(`candidate ${candidateId} does not belong to ${answer}`);
    }
    this.choices.set(answer, { kind: "chosen", candidateId });
  }

  exclude(answer: string): void {
    if (!this.byAnswer.has(answer)) {
      throw new Error(`unknown answer ${answer}`);
    }
    this.choices.set(answer, { kind: "excluded" });
  }

  chosenCount(): number {
    let count = 0;
    for (const choice of this.choices.values()) {
      if (choice.kind === "chosen") count += 1;
    }
    return count;
  }

  isComplete(): boolean {
    return this.answers.every((answer) => this.choices.has(answer));
  }

  /** Null when generation may proceed, otherwise the message to show. */
  blockReason(): string | null {
    if (!this.isComplete()) {
      const missing = this.answers.filter((a) => !this.choices.has(a));
      return `Her cevap için bir ipucu seçin veya hariç tutun (eksik: ${missing.join(", ")})`;
    }
    if (this.chosenCount() === 0) {
      return "Tüm cevaplar hariç tutuldu; bulmaca için en az bir ipucu seçin";
    }
    return null;
  }

  toSelections(): Record<string, string> {
    const selections: Record<string, string> = {};
    for (const [answer, choice] of this.choices) {
      if (choice.kind === "chosen") {
        selections[answer] = choice.candidateId;
      }
    }
    return selections;
  }

  /**
   * Conflict recovery: carry the unsaved choices onto a freshly reloaded
   * session. Choices whose candidate no longer exists are dropped and
   * reported so the UI can flag them.
   */
  replayOnto(fresh: Session): { state: SelectionState; dropped: string[] } {
    const next = new SelectionState(fresh);
    const dropped: string[] = [];
    for (const [answer, choice] of this.choices) {
      if (!next.byAnswer.has(answer)) {
        dropped.push(answer);
        continue;
      }
      if (choice.kind === "excluded") {
        next.exclude(answer);
        continue;
      }
      const stillThere = next
        .candidatesFor(answer)
        .some((c) => c.id === choice.candidateId);
      if (stillThere) {
        next.choose(answer, choice.candidateId);
      } else {
        dropped.push(answer);
      }
    }
    return { state: next, dropped };
  }
}
