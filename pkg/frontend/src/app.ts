/** Single-page educator app: inputs -> clue review -> puzzle view. All state
 * the server can reconstruct lives on the server; this module only wires DOM
 * events to the API client. */
import { ApiClient, ApiError } from "./api";
import { buildGridView } from "./gridview";
import { pollUntilGenerated } from "./poll";
import { SelectionState } from "./selection";
import { ClueInput, GenOverrides, Session } from "./types";

type Child = Node | string | null;

function h(
  tag: string,
  attrs: Record<string, string | boolean | EventListener> = {},
  ...children: Child[]
): HTMLElement {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      el.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) el.setAttribute(key, "");
    } else {
      el.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child !== null) {
      el.append(child);
    }
  }
  return el;
}

interface AppState {
  client: ApiClient;
  session: Session | null;
  selection: SelectionState | null;
  showAnswers: boolean;
  busy: string | null;
  notice: string | null;
}

const state: AppState = {
  client: new ApiClient(
    new URLSearchParams(window.location.search).get("api") ?? "",
  ),
  session: null,
  selection: null,
  showAnswers: false,
  busy: null,
  notice: null,
};

function setNotice(message: string | null): void {
  state.notice = message;
  render();
}

async function run(label: string, action: () => Promise<void>): Promise<void> {
  state.busy = label;
  state.notice = null;
  render();
  try {
    await action();
  } catch (err) {
    if (err instanceof ApiError) {
      state.notice = `${err.code}: ${err.message}`;
    } else {
      state.notice = String(err);
    }
  } finally {
    state.busy = null;
    render();
  }
}

// --- draft screen ----------------------------------------------------------

function readInputs(): ClueInput[] {
  const rows = document.querySelectorAll<HTMLElement>(".input-row");
  const inputs: ClueInput[] = [];
  rows.forEach((row) => {
    const answer =
      row.querySelector<HTMLInputElement>(".answer")?.value.trim() ?? "";
    if (!answer) return;
    const text = row.querySelector<HTMLTextAreaElement>(".text")?.value.trim();
    const category =
      row.querySelector<HTMLInputElement>(".category")?.value.trim();
    inputs.push({
      answer,
      text: text ? text : null,
      category: category ? category : null,
      n: 3,
    });
  });
  return inputs;
}

function inputRow(): HTMLElement {
  return h(
    "fieldset",
    { class: "input-row" },
    h("label", {}, "Cevap", h("input", { class: "answer", placeholder: "ANKARA" })),
    h(
      "label",
      {},
      "Metin (isteğe bağlı)",
      h("textarea", { class: "text", rows: "2" })
    ),
    h(
      "label",
      {},
      "Kategori (isteğe bağlı)",
      h("input", { class: "category", placeholder: "Coğrafya" })
    )
  );
}

function draftScreen(): HTMLElement {
  const rows = h("div", { id: "input-rows" }, inputRow(), inputRow(), inputRow());
  return h(
    "section",
    {},
    h("h2", {}, "1. Cevaplar ve metinler"),
    rows,
    h(
      "div",
      { class: "actions" },
      h("button", { onclick: () => rows.append(inputRow()) }, "Satır ekle"),
      h(
        "button",
        {
          class: "primary",
          onclick: () =>
            run("İpuçları isteniyor", async () => {
              const inputs = readInputs();
              if (inputs.length === 0) {
                throw new Error("En az bir cevap girin");
              }
              const created = await state.client.createSession(inputs);
              const ready = await state.client.requestClues(created.id);
              state.session = ready;
              state.selection = new SelectionState(ready);
            }),
        },
        "İpuçlarını getir"
      )
    )
  );
}

// --- clue review screen ----------------------------------------------------

function readGenConfig(): GenOverrides {
  const num = (id: string): number | undefined => {
    const raw = document.querySelector<HTMLInputElement>(`#${id}`)?.value;
    const value = raw ? Number(raw) : NaN;
    return Number.isFinite(value) ? value : undefined;
  };
  const config: GenOverrides = {};
  const width = num("cfg-width");
  const height = num("cfg-height");
  const seed = num("cfg-seed");
  if (width) config.width = width;
  if (height) config.height = height;
  if (seed !== undefined) config.seed = seed;
  return config;
}

async function submitGeneration(): Promise<void> {
  const session = state.session;
  const selection = state.selection;
  if (!session || !selection) return;
  const blocked = selection.blockReason();
  if (blocked) {
    setNotice(blocked);
    return;
  }
  await run("Bulmaca oluşturuluyor", async () => {
    const config = readGenConfig();
    try {
      await state.client.startGeneration(session.id, selection.toSelections(), {
        config,
        expectedVersion: session.version,
      });
    } catch (err) {
      if (!(err instanceof ApiError) || err.code !== "Conflict") {
        throw err;
      }
      // Stale session: reload, replay the unsaved choices, retry once.
      const fresh = await state.client.getSession(session.id);
      const { state: replayed, dropped } = selection.replayOnto(fresh);
      state.session = fresh;
      state.selection = replayed;
      if (fresh.status !== "clues_ready" || replayed.blockReason()) {
        state.notice =
          "Oturum başka bir yerde değişti; seçimlerinizi gözden geçirin";
        return;
      }
      if (dropped.length > 0) {
        state.notice = `Şu cevapların seçimi düştü: ${dropped.join(", ")}`;
      }
      await state.client.startGeneration(fresh.id, replayed.toSelections(), {
        config,
        expectedVersion: fresh.version,
      });
    }
    state.session = await pollUntilGenerated(state.client, session.id);
  });
}

function reviewScreen(session: Session, selection: SelectionState): HTMLElement {
  const groups = selection.answers.map((answer) => {
    const choice = selection.choiceFor(answer);
    const options = selection.candidatesFor(answer).map((candidate) =>
      h(
        "label",
        { class: "candidate" },
        h("input", {
          type: "radio",
          name: `choice-${answer}`,
          checked: choice?.kind === "chosen" && choice.candidateId === candidate.id,
          onchange: () => {
            selection.choose(answer, candidate.id);
            render();
          },
        }),
        candidate.clue
      )
    );
    options.push(
      h(
        "label",
        { class: "candidate exclude" },
        h("input", {
          type: "radio",
          name: `choice-${answer}`,
          checked: choice?.kind === "excluded",
          onchange: () => {
            selection.exclude(answer);
            render();
          },
        }),
        "Bu cevabı hariç tut"
      )
    );
    return h("fieldset", {}, h("legend", {}, answer), ...options);
  });

  const failures = session.failures.map((failure) =>
    h("li", {}, `${failure.answer}: ${failure.code}: ${failure.message}`)
  );
  const blocked = selection.blockReason();
  return h(
    "section",
    {},
    h("h2", {}, "2. İpuçlarını seçin"),
    ...groups,
    failures.length > 0
      ? h("details", {}, h("summary", {}, "Üretilemeyen cevaplar"), h("ul", {}, ...failures))
      : null,
    h(
      "div",
      { class: "gen-config" },
      h("label", {}, "Genişlik", h("input", { id: "cfg-width", value: "11", type: "number" })),
      h("label", {}, "Yükseklik", h("input", { id: "cfg-height", value: "11", type: "number" })),
      h("label", {}, "Tohum", h("input", { id: "cfg-seed", value: "0", type: "number" }))
    ),
    h(
      "div",
      { class: "actions" },
      h(
        "button",
        {
          class: "primary",
          disabled: blocked !== null,
          onclick: () => void submitGeneration(),
        },
        "Bulmacayı oluştur"
      ),
      blocked ? h("p", { class: "hint" }, blocked) : null
    )
  );
}

// --- puzzle screen ---------------------------------------------------------

function puzzleScreen(session: Session): HTMLElement {
  if (!session.puzzle) {
    return h("section", {}, h("p", {}, "Bulmaca hazırlanıyor…"));
  }
  const view = buildGridView(session.puzzle);
  const table = h("table", { class: "grid" });
  for (const row of view.cells) {
    const tr = h("tr", {});
    for (const cell of row) {
      const td = h(
        "td",
        { class: cell.blocked ? "blocked" : "cell" },
        cell.number !== null ? h("span", { class: "num" }, String(cell.number)) : null,
        !cell.blocked && state.showAnswers
          ? h("span", { class: "letter" }, cell.letter ?? "")
          : null
      );
      tr.append(td);
    }
    table.append(tr);
  }
  const clueList = (title: string, entries: typeof view.across) =>
    h(
      "div",
      { class: "clues" },
      h("h3", {}, title),
      h(
        "ol",
        {},
        ...entries.map((entry) =>
          h("li", { value: String(entry.num) }, `${entry.clue} (${entry.len})`)
        )
      )
    );
  return h(
    "section",
    { class: "puzzle" },
    h("h2", {}, "3. Bulmaca"),
    h(
      "div",
      { class: "actions no-print" },
      h(
        "label",
        {},
        h("input", {
          type: "checkbox",
          checked: state.showAnswers,
          onchange: () => {
            state.showAnswers = !state.showAnswers;
            render();
          },
        }),
        "Cevapları göster"
      ),
      h("button", { onclick: () => window.print() }, "Yazdır"),
      h(
        "button",
        {
          onclick: () => {
            state.session = null;
            state.selection = null;
            state.showAnswers = false;
            render();
          },
        },
        "Yeni bulmaca"
      )
    ),
    table,
    h("div", { class: "clue-columns" },
      clueList("Soldan sağa", view.across),
      clueList("Yukarıdan aşağıya", view.down))
  );
}

// --- root render -----------------------------------------------------------

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.replaceChildren();
  const session = state.session;
  if (state.notice) {
    root.append(h("p", { class: "notice", role: "alert" }, state.notice));
  }
  if (state.busy) {
    root.append(h("p", { class: "busy no-print" }, `${state.busy}…`));
  }
  if (!session) {
    root.append(draftScreen());
  } else if (session.status === "clues_ready" && state.selection) {
    root.append(reviewScreen(session, state.selection));
  } else {
    root.append(puzzleScreen(session));
  }
}

document.addEventListener("DOMContentLoaded", render);
