/**
 * Demo application wiring: input box, run-coreference toggle, submit, error
 * banner, and the annotated view.  One request in flight at a time; a new
 * submit cancels the previous one and the previous view is always replaced.
 */
import { AnnotationClient, ClientError, LENGTH_CAP, codePointLength } from "./api.js";
import { computeView, renderView } from "./view.js";

export interface App {
  input: HTMLTextAreaElement;
  corefToggle: HTMLInputElement;
  submitButton: HTMLButtonElement;
  banner: HTMLElement;
  output: HTMLElement;
  submit(): Promise<void>;
}

export function initApp(root: HTMLElement, baseUrl = "", client?: AnnotationClient): App {
  const api = client ?? new AnnotationClient(baseUrl);
  root.innerHTML = `
    <header class="bar">
      <h1>multilingual frame parsing &amp; coreference</h1>
      <p class="hint">Up to ${LENGTH_CAP} characters. Hover a highlight for details.</p>
    </header>
    <section class="controls">
      <textarea class="input" rows="5" spellcheck="false"
        placeholder="Type or paste a short document, one sentence per line."></textarea>
      <div class="row">
        <label class="toggle"><input type="checkbox" class="coref" checked> run coreference</label>
        <span class="counter"></span>
        <button type="button" class="submit" disabled>annotate</button>
      </div>
    </section>
    <div class="banner" hidden></div>
    <section class="output"></section>
  `;
  const input = root.querySelector<HTMLTextAreaElement>(".input")!;
  const corefToggle = root.querySelector<HTMLInputElement>(".coref")!;
  const submitButton = root.querySelector<HTMLButtonElement>(".submit")!;
  const banner = root.querySelector<HTMLElement>(".banner")!;
  const output = root.querySelector<HTMLElement>(".output")!;
  const counter = root.querySelector<HTMLElement>(".counter")!;

  const refresh = () => {
    const length = codePointLength(input.value);
    submitButton.disabled = length === 0 || length > LENGTH_CAP;
    counter.textContent = `${length}/${LENGTH_CAP}`;
    counter.classList.toggle("over", length > LENGTH_CAP);
  };
  input.addEventListener("input", refresh);
  refresh();

  const showError = (message: string) => {
    banner.textContent = message;
    banner.hidden = false;
    output.textContent = ""; // never leave stale highlights behind
  };

  const submit = async () => {
    banner.hidden = true;
    try {
      const annotated = await api.submit(input.value);
      const view = computeView(annotated, { runCoref: corefToggle.checked });
      renderView(output, view);
    } catch (err) {
      if (err instanceof ClientError && err.message.includes("superseded")) {
        return; // a newer submission owns the view now
      }
      showError(err instanceof Error ? err.message : String(err));
    }
  };
  submitButton.addEventListener("click", () => void submit());

  return { input, corefToggle, submitButton, banner, output, submit };
}

declare global {
  interface Window {
    __demoApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.__demoApp = initApp(document.getElementById("app")!);
}
