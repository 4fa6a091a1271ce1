/**
 * The annotation view. One class owns the DOM; render() redraws everything
 * from the latest server snapshot, which is the only source of document
 * truth. Local fields cover presentation choices only: which log row is
 * selected, whether the diff view is toggled on, which prompt the arrows
 * point at.
 */

import type {
  AsrEventJson,
  ClientMessage,
  PromptJson,
  SegmentJson,
  ServerMessage,
  SnapshotJson,
} from './protocol.js';
import type { Connection } from './connection.js';
import type { SessionClock } from './clock.js';
import type { AsrSource } from './sources.js';
import { ReplaySource } from './sources.js';
import { renderScript, renderState } from './diffview.js';

const SKELETON = `
  <header class="toolbar">
    <button data-id="begin">Begin transcription</button>
    <span data-id="capture" class="capture idle">idle</span>
    <label class="upload">replay event log
      <input data-id="event-log" type="file" accept="application/json">
    </label>
    <span data-id="status" class="status"></span>
  </header>
  <main class="panes">
    <section class="pane prompt-pane">
      <h2>Target</h2>
      <div data-id="task" class="task"></div>
      <pre data-id="target" class="target"></pre>
      <div class="prompt-nav">
        <button data-id="prev-prompt" class="arrow">&#8592;</button>
        <button data-id="next-prompt" class="arrow">&#8594;</button>
        <button data-id="skip-prompt" class="skip">X</button>
      </div>
    </section>
    <section class="pane output-pane">
      <h2>Transcription output</h2>
      <button data-id="diff-toggle">See Diff View</button>
      <div data-id="output" class="output"></div>
    </section>
    <section class="pane log-pane">
      <h2>Command log</h2>
      <ol data-id="segments" class="segments"></ol>
      <div data-id="flags" class="flags"></div>
    </section>
    <section class="pane state-pane">
      <h2>State editor</h2>
      <div class="field"><label>before</label>
        <pre data-id="pre-state" class="doc"></pre></div>
      <div class="field"><label>after</label>
        <textarea data-id="post-state" rows="4"></textarea></div>
      <div data-id="downstream-warning" class="warning" hidden>
        Editing an earlier command's state erases the edits of every later
        command; they will re-derive from this one.
      </div>
      <div class="field"><label>change</label>
        <div data-id="state-diff" class="doc"></div></div>
    </section>
  </main>
  <footer class="controls">
    <button data-id="delete-selected">Delete Selected Command &amp; Afterwards</button>
    <button data-id="reset">Reset</button>
    <input data-id="save-name" type="text" placeholder="trajectory name">
    <button data-id="submit">Submit</button>
  </footer>
`;

export class AnnotatorApp {
  last: SnapshotJson | null = null;

  private selectedStart: number | null = null;
  private diffViewOn = false;
  private promptIndex = 0;
  private source: AsrSource | null = null;
  private listening = false;
  private readonly el: Record<string, HTMLElement> = {};

  constructor(
    private readonly root: HTMLElement,
    private readonly connection: Connection,
    private readonly clock: SessionClock,
    private readonly prompts: PromptJson[],
    private readonly makeLiveSource?: () => AsrSource,
  ) {}

  /** Build the DOM, wire events, and adopt whatever the session holds. */
  async attach(): Promise<void> {
    this.root.innerHTML = SKELETON;
    for (const node of this.root.querySelectorAll<HTMLElement>('[data-id]')) {
      this.el[node.dataset.id as string] = node;
    }
    this.bind();
    this.connection.onMessage((msg) => this.receive(msg));
    const view = await this.connection.send({ type: 'sync' });
    if (
      view.type === 'snapshot' &&
      view.n_events === 0 &&
      view.task === '' &&
      this.prompts.length
    ) {
      // virgin session: adopt the first prompt; an ongoing one is left as-is
      await this.resetToPrompt(0);
    }
  }

  // -- wiring ------------------------------------------------------------

  private bind(): void {
    const doc = this.root.ownerDocument;
    const win = doc.defaultView as Window;

    win.addEventListener('keydown', (ev: KeyboardEvent) => {
      if (ev.key !== 'Control' || ev.repeat) return;
      this.act({ type: 'key_down', t_ms: this.clock.now() });
    });
    win.addEventListener('keyup', (ev: KeyboardEvent) => {
      if (ev.key !== 'Control') return;
      this.act({ type: 'key_up', t_ms: this.clock.now() });
    });

    this.el['begin'].addEventListener('click', () => this.beginTranscription());
    this.el['diff-toggle'].addEventListener('click', () => {
      this.diffViewOn = !this.diffViewOn;
      this.el['diff-toggle'].classList.toggle('on', this.diffViewOn);
      if (this.last) this.render(this.last);
    });

    this.el['prev-prompt'].addEventListener('click', () => this.stepPrompt(-1));
    this.el['next-prompt'].addEventListener('click', () => this.stepPrompt(1));
    this.el['skip-prompt'].addEventListener('click', () => this.stepPrompt(1));

    this.el['reset'].addEventListener('click', () => {
      void this.resetToPrompt(this.promptIndex);
    });
    this.el['delete-selected'].addEventListener('click', () => {
      if (this.selectedStart === null) return;
      this.act({ type: 'truncate_from', start_ms: this.selectedStart });
    });
    this.el['submit'].addEventListener('click', () => {
      const name = (this.el['save-name'] as HTMLInputElement).value.trim();
      this.act({ type: 'submit', name: name || this.currentPrompt().id });
    });

    const postState = this.el['post-state'] as HTMLTextAreaElement;
    // the recognizer must not transcribe over manual edits (it keeps
    // recording otherwise); entering an editor pauses it
    postState.addEventListener('focus', () => this.pauseListening());
    postState.addEventListener('change', () => {
      if (this.selectedStart === null) return;
      this.act({
        type: 'set_post_state',
        start_ms: this.selectedStart,
        content: postState.value,
      });
    });

    const upload = this.el['event-log'] as HTMLInputElement;
    upload.addEventListener('change', () => {
      const file = upload.files?.[0];
      if (!file) return;
      void file.text().then((text) => {
        this.playEventLog(JSON.parse(text) as AsrEventJson[]);
      });
    });
  }

  private receive(msg: ServerMessage): void {
    if (msg.type === 'snapshot') {
      this.last = msg;
      this.render(msg);
    } else if (msg.type === 'error') {
      this.setStatus(`error: ${msg.message}`, 'error');
    } else {
      this.setStatus(`saved ${msg.name} (${msg.segments} ops)`, 'ok');
    }
  }

  /** Every user action is exactly one message; failures land in the status bar. */
  private act(msg: ClientMessage): void {
    void this.connection.send(msg).catch((err: Error) => {
      this.setStatus(`error: ${err.message}`, 'error');
    });
  }

  // -- actions -----------------------------------------------------------

  private beginTranscription(): void {
    if (this.listening || !this.makeLiveSource) return;
    this.clock.start();
    this.source = this.makeLiveSource();
    this.source.start((event) => {
      this.act({ type: 'asr_event', event });
    });
    this.listening = true;
    this.renderCapture();
  }

  private pauseListening(): void {
    if (!this.listening) return;
    this.source?.stop();
    this.listening = false;
    this.renderCapture();
  }

  /** Feed a recorded event log through the normal send path. */
  playEventLog(events: AsrEventJson[]): void {
    new ReplaySource(events, 'immediate').start((event) => {
      this.act({ type: 'asr_event', event });
    });
  }

  private stepPrompt(step: number): void {
    if (!this.prompts.length) return;
    const n = this.prompts.length;
    this.promptIndex = (this.promptIndex + step + n) % n;
    void this.resetToPrompt(this.promptIndex);
  }

  private async resetToPrompt(index: number): Promise<void> {
    this.promptIndex = index;
    const prompt = this.currentPrompt();
    this.selectedStart = null;
    this.clock.start();
    (this.el['save-name'] as HTMLInputElement).value = prompt.id;
    await this.connection
      .send({
        type: 'reset',
        task: prompt.task,
        initial_content: prompt.initial_content,
        target_content: prompt.target_content,
      })
      .catch((err: Error) => this.setStatus(`error: ${err.message}`, 'error'));
  }

  private currentPrompt(): PromptJson {
    return (
      this.prompts[this.promptIndex] ?? {
        id: 'session',
        task: '',
        initial_content: '',
        target_content: '',
      }
    );
  }

  // -- rendering ---------------------------------------------------------

  private render(snap: SnapshotJson): void {
    const doc = this.root.ownerDocument;
    this.el['task'].textContent = snap.task;
    this.el['target'].textContent = snap.target;
    (this.el['target'].parentElement as HTMLElement).classList.toggle(
      'free-form',
      !snap.target,
    );

    // drop a selection whose segment no longer exists (truncation, reset)
    if (
      this.selectedStart !== null &&
      !snap.segments.some((s) => s.start_ms === this.selectedStart)
    ) {
      this.selectedStart = null;
    }

    this.renderOutput(snap, doc);
    this.renderCapture();
    this.renderSegments(snap, doc);
    this.renderStateEditor(snap, doc);
    this.renderFlags(snap, doc);

    (this.el['submit'] as HTMLButtonElement).disabled = !snap.can_submit;
    (this.el['delete-selected'] as HTMLButtonElement).disabled =
      this.selectedStart === null;
    const toggle = this.el['diff-toggle'] as HTMLButtonElement;
    toggle.disabled = !snap.target;
    toggle.title = snap.target ? '' : 'free-form prompt: no verbatim target';
  }

  private renderOutput(snap: SnapshotJson, doc: Document): void {
    const output = this.el['output'];
    output.replaceChildren();
    if (this.diffViewOn && snap.target_diff) {
      // green: still to add; red: still to delete; no color means done
      output.append(
        renderScript(doc, snap.target_diff, snap.visible_state.content),
      );
      output.classList.add('diffed');
    } else {
      output.append(renderState(doc, snap.visible_state));
      output.classList.remove('diffed');
    }
  }

  private renderCapture(): void {
    const capture = this.el['capture'];
    const holding = this.last?.open_hold != null;
    capture.classList.toggle('holding', holding);
    capture.classList.toggle('listening', this.listening && !holding);
    capture.classList.toggle('idle', !this.listening && !holding);
    capture.textContent = holding
      ? 'command capture (ctrl held)'
      : this.listening
        ? 'listening'
        : 'idle';
  }

  private renderSegments(snap: SnapshotJson, doc: Document): void {
    const list = this.el['segments'];
    list.replaceChildren();
    for (const segment of snap.segments) {
      list.append(this.segmentRow(segment, doc));
    }
  }

  private segmentRow(segment: SegmentJson, doc: Document): HTMLElement {
    const row = doc.createElement('li');
    row.className = segment.kind;
    row.dataset.start = String(segment.start_ms);
    row.classList.toggle('flagged', segment.flags.length > 0);
    row.classList.toggle('selected', segment.start_ms === this.selectedStart);

    const head = doc.createElement('div');
    head.className = 'row-head';
    head.textContent = `${segment.index}. ${segment.kind} ` +
      `[${segment.start_ms}-${segment.end_ms}ms]`;
    row.append(head);

    const asr = doc.createElement('div');
    asr.className = 'asr';
    asr.textContent = `ASR: ${segment.text}`;
    row.append(asr);

    if (segment.kind === 'command') {
      const label = doc.createElement('label');
      label.className = 'gold';
      label.textContent = 'Gold ASR ';
      const input = doc.createElement('input');
      input.type = 'text';
      input.value = segment.normalized ?? segment.text;
      input.addEventListener('focus', () => this.pauseListening());
      input.addEventListener('change', () => {
        this.act({
          type: 'set_gold_normalization',
          start_ms: segment.start_ms,
          text: input.value,
        });
      });
      label.append(input);
      row.append(label);

      const program = doc.createElement('div');
      program.className = 'program';
      program.textContent = segment.overridden
        ? 'state assigned by hand'
        : (segment.program ?? segment.error ?? '');
      row.append(program);
    }

    row.addEventListener('click', (ev) => {
      // typing in the gold field is not a row selection
      if ((ev.target as HTMLElement).tagName === 'INPUT') return;
      this.selectedStart = segment.start_ms;
      if (this.last) this.render(this.last);
    });
    return row;
  }

  private renderStateEditor(snap: SnapshotJson, doc: Document): void {
    const selected = snap.segments.find(
      (s) => s.start_ms === this.selectedStart,
    );
    const pre = this.el['pre-state'];
    const post = this.el['post-state'] as HTMLTextAreaElement;
    const diffBox = this.el['state-diff'];
    const warning = this.el['downstream-warning'];
    diffBox.replaceChildren();
    if (!selected) {
      pre.textContent = '';
      post.value = '';
      post.disabled = true;
      warning.hidden = true;
      return;
    }
    pre.textContent = selected.pre_state.content;
    post.disabled = selected.kind !== 'command';
    if (doc.activeElement !== post) {
      post.value = selected.post_state.content;
    }
    diffBox.append(
      renderScript(doc, selected.diff, selected.pre_state.content),
    );
    const isLast =
      snap.segments[snap.segments.length - 1]?.start_ms === selected.start_ms;
    warning.hidden = isLast;
  }

  private renderFlags(snap: SnapshotJson, doc: Document): void {
    const box = this.el['flags'];
    box.replaceChildren();
    for (const flag of snap.flags) {
      const div = doc.createElement('div');
      div.className = 'flag';
      div.textContent = `op ${flag.segment}: ${flag.message}`;
      box.append(div);
    }
  }

  private setStatus(text: string, kind: 'ok' | 'error'): void {
    const status = this.el['status'];
    status.textContent = text;
    status.className = `status ${kind}`;
  }
}
