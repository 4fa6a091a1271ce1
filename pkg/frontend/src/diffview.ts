/**
 * Renders server-sent edit scripts. The client never diffs text itself:
 * every script arrives from the server, and this module only turns ops
 * into colored spans (insert = green "to add", delete = red "to remove").
 */

import type { DocStateJson, EditOp } from './protocol.js';

export function renderScript(
  doc: Document,
  script: EditOp[],
  source: string,
): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  let pos = 0;
  for (const op of script) {
    if ('retain' in op) {
      fragment.append(doc.createTextNode(source.slice(pos, pos + op.retain)));
      pos += op.retain;
    } else if ('delete' in op) {
      const span = doc.createElement('span');
      span.className = 'diff-del';
      span.textContent = source.slice(pos, pos + op.delete);
      fragment.append(span);
      pos += op.delete;
    } else {
      const span = doc.createElement('span');
      span.className = 'diff-ins';
      span.textContent = op.insert;
      fragment.append(span);
    }
  }
  // scripts always cover their source exactly; anything left over would
  // mean we were given a script for different text
  if (pos !== source.length) {
    throw new Error(`edit script covered ${pos} of ${source.length} chars`);
  }
  return fragment;
}

/** Plain document rendering with the selection highlighted. */
export function renderState(doc: Document, state: DocStateJson): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  const [anchor, focus] = state.selection;
  const lo = Math.min(anchor, focus);
  const hi = Math.max(anchor, focus);
  fragment.append(doc.createTextNode(state.content.slice(0, lo)));
  const sel = doc.createElement('span');
  sel.className = lo === hi ? 'caret' : 'selection';
  sel.textContent = state.content.slice(lo, hi);
  fragment.append(sel);
  fragment.append(doc.createTextNode(state.content.slice(hi)));
  return fragment;
}
