import { ServiceClient } from "./api.js";
import { BoardController, parseWhatIfForm } from "./app.js";

// Entry point. The page is served by the decision service itself (or any
// static host); ?trial=<id> picks the trial, ?base=<url> overrides the
// service origin, ?as_of=<day> pins the view to a past day.

function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const trialId = params.get("trial");
  const base = params.get("base") ?? "";
  const asOfRaw = params.get("as_of");
  const asOf = asOfRaw === null ? null : Number(asOfRaw);

  const boardHost = document.getElementById("board");
  const whatIfHost = document.getElementById("whatif");
  const form = document.getElementById("whatif-form") as HTMLFormElement | null;
  if (boardHost === null) {
    return;
  }
  if (trialId === null || trialId === "") {
    boardHost.textContent = "add ?trial=<id> to the URL to watch a trial";
    return;
  }

  const client = new ServiceClient(base);
  const controller = new BoardController(client, trialId, boardHost, whatIfHost, {
    asOf: asOf !== null && Number.isFinite(asOf) ? asOf : null,
  });
  controller.start();
  controller.clearExploration();

  if (form !== null) {
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const read = (name: string): string =>
        (form.elements.namedItem(name) as HTMLInputElement | null)?.value ?? "";
      try {
        const events = parseWhatIfForm({
          patientId: read("patient"),
          dltDay: read("day"),
          reportedAt: read("at"),
        });
        void controller.explore(events);
      } catch (exc) {
        const host = document.getElementById("whatif");
        if (host !== null) {
          host.textContent = exc instanceof Error ? exc.message : String(exc);
        }
      }
    });
    form.addEventListener("reset", () => controller.clearExploration());
  }
}

boot();
