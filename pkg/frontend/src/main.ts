import { ApiClient } from './api.js';
import { SessionController } from './state.js';
import { ActionName, ToolName } from './types.js';

const TOOLS: ToolName[] = ['scroll', 'scroll_div', 'clustering', 'diverxplorer'];

function mount(): void {
  const root = document.getElementById('app');
  const picker = document.getElementById('tool-picker');
  if (!root || !picker) return;

  const controller = new SessionController(new ApiClient(''));

  const redraw = () => {
    root.innerHTML = controller.render();
  };

  picker.innerHTML = TOOLS.map(
    (tool) => `<button class="tool" data-tool="${tool}">${tool.replace('_', '+')}</button>`,
  ).join('');

  picker.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>('[data-tool]');
    if (!target) return;
    controller.start(target.dataset.tool as ToolName).then(redraw, redraw);
    redraw();
  });

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>('[data-action]');
    if (!target || target.hasAttribute('disabled')) return;
    const action = target.dataset.action as ActionName;
    const raw = target.dataset.imageId;
    const selected = raw === undefined ? undefined : Number(raw);
    controller.dispatch(action, selected).then(redraw, redraw);
    redraw(); // optimistic: controls disable while the request runs
  });

  redraw();
}

document.addEventListener('DOMContentLoaded', mount);
