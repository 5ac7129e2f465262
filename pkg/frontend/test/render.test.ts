import { describe, expect, it } from 'vitest';

import { renderGrid, renderedImageIds } from '../src/render.js';
import { ApiSessionView, GridCell } from '../src/types.js';

function view(overrides: Partial<ApiSessionView> = {}): ApiSessionView {
  const grid: GridCell[] = [
    { id: 7, uri: 'http://img/7.jpg', is_root: true },
    { id: 3, uri: 'http://img/3.jpg', is_root: false },
    { id: 9, uri: 'http://img/9.jpg', is_root: false },
  ];
  return {
    session_id: 's1',
    tool: 'diverxplorer',
    step: 1,
    max_steps: 4,
    grid,
    can_see_more: true,
    can_back: false,
    status: 'exploring',
    chosen_image: null,
    subset_logdet: -2.5,
    page: 0,
    total_count: 3,
    ...overrides,
  };
}

function state(v: ApiSessionView, busy = false, error: string | null = null) {
  return { view: v, cells: v.grid, busy, error };
}

describe('renderGrid', () => {
  it('renders cells in the server order with the root badged', () => {
    const html = renderGrid(state(view()));
    expect(renderedImageIds(html)).toEqual([7, 3, 9]);
    expect(html).toContain('root-badge');
    expect(html).toContain('Step 1 of 4');
  });

  it('disables Back on step 1 and enables See more', () => {
    const html = renderGrid(state(view()));
    expect(html).toMatch(/data-action="back" disabled/);
    expect(html).toMatch(/data-action="see_more" data-image-id="7"\s*>/);
  });

  it('enables Back after the first step', () => {
    const html = renderGrid(state(view({ step: 2, can_back: true })));
    expect(html).toMatch(/data-action="back"\s*>/);
  });

  it('disables everything once an image is chosen and highlights it', () => {
    const html = renderGrid(state(view({ status: 'chosen', chosen_image: 3 })));
    expect(html).not.toMatch(/data-action="[a-z_]+"(?: data-image-id="\d+")?\s*>/);
    expect(html).toContain('class="cell chosen"');
    expect(html).toContain('chosen image 3');
  });

  it('renders scroll views as a continuous list without See more', () => {
    const html = renderGrid(state(view({ tool: 'scroll', can_see_more: false, total_count: 3 })));
    expect(html).toContain('scroll-list');
    expect(html).not.toContain('See more');
    expect(html).toContain('Choose');
  });

  it('renders clustering fan-out exactly as served (4 children = 4 cells)', () => {
    const cells: GridCell[] = [0, 1, 2, 3].map((id) => ({
      id,
      uri: `http://img/${id}.jpg`,
      is_root: false,
    }));
    const v = view({ tool: 'clustering', grid: cells, total_count: 4 });
    const html = renderGrid({ view: v, cells, busy: false, error: null });
    expect(renderedImageIds(html)).toEqual([0, 1, 2, 3]);
  });

  it('shows an inline error strip without dropping the grid', () => {
    const html = renderGrid(state(view(), false, 'STEP_LIMIT: already at final step'));
    expect(html).toContain('error-strip');
    expect(renderedImageIds(html)).toEqual([7, 3, 9]);
  });

  it('escapes uris', () => {
    const v = view();
    v.grid[1].uri = 'http://img/"><script>alert(1)</script>';
    const html = renderGrid(state(v));
    expect(html).not.toContain('<script>alert');
  });
});
