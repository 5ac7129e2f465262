import { ApiClient, ServiceError } from './api.js';
import { RenderState, renderGrid } from './render.js';
import { ActionName, ApiSessionView, GridCell, ToolName } from './types.js';

/** Client-side session driver.
 *
 *  Holds the latest server view plus in-flight/error flags and exposes
 *  exactly the transitions the server state machine allows. All session
 *  logic stays server-side: the controller never advances state locally,
 *  it only re-renders whatever view the service returns.
 */
export class SessionController {
  view: ApiSessionView | null = null;
  cells: GridCell[] = [];
  busy = false;
  error: string | null = null;

  constructor(private readonly api: ApiClient) {}

  private async refresh(view: ApiSessionView): Promise<void> {
    this.view = view;
    this.cells = await this.api.fetchAllCells(view);
  }

  async start(tool: ToolName, corpusId?: string, overrides?: Record<string, unknown>): Promise<void> {
    this.busy = true;
    try {
      await this.refresh(await this.api.createSession(tool, corpusId, overrides));
      this.error = null;
    } finally {
      this.busy = false;
    }
  }

  canDispatch(action: ActionName): boolean {
    if (!this.view || this.busy || this.view.status !== 'exploring') {
      return false;
    }
    if (action === 'see_more') return this.view.can_see_more;
    if (action === 'back') return this.view.can_back;
    return true;
  }

  /** Send one action; ignores calls while a request is in flight and
   *  actions the current view forbids (the double-click guard). A 409
   *  from a lost race surfaces inline without losing state. */
  async dispatch(action: ActionName, selected?: number): Promise<boolean> {
    if (!this.view || !this.canDispatch(action)) {
      return false;
    }
    this.busy = true;
    this.error = null;
    try {
      await this.refresh(await this.api.act(this.view.session_id, action, selected));
      return true;
    } catch (err) {
      if (err instanceof ServiceError) {
        this.error = `${err.detail.code}: ${err.detail.message}`;
        return false;
      }
      this.error = 'network failure, try again';
      return false;
    } finally {
      this.busy = false;
    }
  }

  render(): string {
    if (!this.view) {
      return '<div class="loading">starting session…</div>';
    }
    const state: RenderState = {
      view: this.view,
      cells: this.cells,
      busy: this.busy,
      error: this.error,
    };
    return renderGrid(state);
  }
}
