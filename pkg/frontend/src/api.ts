import { ActionName, ApiError, ApiSessionView, GridCell, ToolName, isStepwise } from './types.js';

export class ServiceError extends Error {
  constructor(public readonly status: number, public readonly detail: ApiError) {
    super(`${detail.code}: ${detail.message}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(`${base}${path}`, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  });
  if (!response.ok) {
    let detail: ApiError = { code: `HTTP_${response.status}`, message: response.statusText };
    try {
      const body = await response.json();
      if (body && typeof body.code === 'string') {
        detail = body as ApiError;
      }
    } catch {
      // keep the fallback detail
    }
    throw new ServiceError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  createSession(tool: ToolName, corpusId?: string, overrides?: Record<string, unknown>): Promise<ApiSessionView> {
    return request<ApiSessionView>(this.base, '/sessions', {
      method: 'POST',
      body: JSON.stringify({ tool, corpus_id: corpusId ?? null, ...overrides }),
    });
  }

  getSession(sessionId: string, page = 0): Promise<ApiSessionView> {
    return request<ApiSessionView>(this.base, `/sessions/${sessionId}?page=${page}`);
  }

  act(sessionId: string, action: ActionName, selected?: number): Promise<ApiSessionView> {
    return request<ApiSessionView>(this.base, `/sessions/${sessionId}/action`, {
      method: 'POST',
      body: JSON.stringify({ action, selected: selected ?? null }),
    });
  }

  getLog(sessionId: string): Promise<unknown> {
    return request<unknown>(this.base, `/sessions/${sessionId}/log`);
  }

  /** Scroll tools paginate on the wire; stitch every page back together
   *  so the view renders as one continuous list. */
  async fetchAllCells(view: ApiSessionView): Promise<GridCell[]> {
    if (isStepwise(view.tool) || view.grid.length >= view.total_count) {
      return view.grid;
    }
    const cells = [...view.grid];
    let page = view.page + 1;
    while (cells.length < view.total_count) {
      const next = await this.getSession(view.session_id, page);
      if (next.grid.length === 0) break;
      cells.push(...next.grid);
      page += 1;
    }
    return cells;
  }
}
