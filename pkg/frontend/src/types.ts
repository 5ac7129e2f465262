export interface GridCell {
  id: number;
  uri: string;
  is_root: boolean;
}

export type SessionStatus = 'exploring' | 'chosen';

export type ToolName = 'scroll' | 'scroll_div' | 'clustering' | 'diverxplorer';

export interface ApiSessionView {
  session_id: string;
  tool: ToolName;
  step: number;
  max_steps: number;
  grid: GridCell[];
  can_see_more: boolean;
  can_back: boolean;
  status: SessionStatus;
  chosen_image: number | null;
  subset_logdet: number | null;
  page: number;
  total_count: number;
}

export interface ApiError {
  code: string;
  message: string;
}

export type ActionName = 'see_more' | 'choose' | 'back' | 'top';

export function isStepwise(tool: ToolName): boolean {
  return tool === 'clustering' || tool === 'diverxplorer';
}
