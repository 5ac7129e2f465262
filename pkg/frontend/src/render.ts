import { ApiSessionView, GridCell, isStepwise } from './types.js';

export interface RenderState {
  view: ApiSessionView;
  cells: GridCell[];
  busy: boolean;
  error: string | null;
}

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function cellCard(cell: GridCell, state: RenderState): string {
  const { view, busy } = state;
  const chosen = view.status === 'chosen' && view.chosen_image === cell.id;
  const classes = ['cell', cell.is_root ? 'root' : '', chosen ? 'chosen' : '']
    .filter(Boolean)
    .join(' ');
  const disabled = busy || view.status === 'chosen' ? 'disabled' : '';
  const seeMore =
    isStepwise(view.tool) && view.can_see_more
      ? `<button class="btn-see-more" data-action="see_more" data-image-id="${cell.id}" ${disabled}>See more</button>`
      : '';
  const badge = cell.is_root ? '<span class="root-badge">carried over</span>' : '';
  return `
    <figure class="${classes}" data-image-id="${cell.id}">
      <img src="${esc(cell.uri)}" alt="image ${cell.id}" loading="lazy" />
      ${badge}
      <figcaption>
        ${seeMore}
        <button class="btn-choose" data-action="choose" data-image-id="${cell.id}" ${disabled}>Choose</button>
      </figcaption>
    </figure>`;
}

export function renderGrid(state: RenderState): string {
  const { view, cells, busy, error } = state;
  const stepwise = isStepwise(view.tool);
  const disabled = busy || view.status === 'chosen' ? 'disabled' : '';
  const backDisabled = view.can_back && !busy && view.status === 'exploring' ? '' : 'disabled';
  const header = stepwise
    ? `<div class="step-indicator">Step ${view.step} of ${view.max_steps}</div>`
    : `<div class="step-indicator">${view.total_count} images, most relevant first</div>`;
  const controls = `
    <nav class="controls">
      <button class="btn-back" data-action="back" ${backDisabled}>Back</button>
      <button class="btn-top" data-action="top" ${disabled}>Top</button>
      ${header}
      <span class="status">${view.status === 'chosen' ? `chosen image ${view.chosen_image}` : 'exploring'}</span>
    </nav>`;
  const errorStrip = error ? `<div class="error-strip" role="alert">${esc(error)}</div>` : '';
  const body = cells.map((cell) => cellCard(cell, state)).join('');
  const layout = stepwise ? 'grid' : 'scroll-list';
  return `${controls}${errorStrip}<div class="${layout}">${body}</div>`;
}

/** Image ids in display order, extracted back out of rendered markup.
 *  Lets tests compare the DOM against the server view cell-for-cell. */
export function renderedImageIds(html: string): number[] {
  const ids: number[] = [];
  const pattern = /<figure[^>]*data-image-id="(\d+)"/g;
  let match: RegExpExecArray | null;
  while ((match = pattern.exec(html)) !== null) {
    ids.push(Number(match[1]));
  }
  return ids;
}
