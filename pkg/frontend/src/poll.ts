/** Poll the session until generation completes (the service returns 202 and
 * finishes in the background). */
import { ApiClient } from "./api";
import { Session } from "./types";

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export async function pollUntilGenerated(
  client: ApiClient,
  sessionId: string,
  options: { intervalMs?: number; timeoutMs?: number } = {}
): Promise<Session> {
  const intervalMs = options.intervalMs ?? 300;
  const deadline = Date.now() + (options.timeoutMs ?? 30_000);
  for (;;) {
    const session = await client.getSession(sessionId);
    if (session.status === "generated" && session.puzzle) {
      return session;
    }
    if (session.generation.state === "failed") {
      throw new Error(
        `generation failed: ${JSON.stringify(session.generation.error)}`
      );
    }
    if (Date.now() >= deadline) {
      throw new Error("timed out waiting for puzzle generation");
    }
    await sleep(intervalMs);
  }
}
