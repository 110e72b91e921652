// Settings side panel: edits the zoom + mini-map settings document and
// hands the updated document to the caller (who PUTs it to the server).

import type { SettingsDoc } from './types';

export interface SettingsPanel {
  element: HTMLElement;
  setDocument(doc: SettingsDoc): void;
  readDocument(): SettingsDoc;
}

function numberField(label: string, id: string, value: number, step = 1): HTMLElement {
  const wrap = document.createElement('label');
  wrap.className = 'field';
  wrap.textContent = label;
  const input = document.createElement('input');
  input.type = 'number';
  input.id = id;
  input.step = String(step);
  input.value = String(value);
  wrap.appendChild(input);
  return wrap;
}

function selectField(label: string, id: string, value: string, options: string[]): HTMLElement {
  const wrap = document.createElement('label');
  wrap.className = 'field';
  wrap.textContent = label;
  const select = document.createElement('select');
  select.id = id;
  for (const option of options) {
    const el = document.createElement('option');
    el.value = option;
    el.textContent = option;
    if (option === value) el.selected = true;
    select.appendChild(el);
  }
  wrap.appendChild(select);
  return wrap;
}

const input = (root: HTMLElement, id: string) =>
  root.querySelector<HTMLInputElement>(`#${id}`)!;
const select = (root: HTMLElement, id: string) =>
  root.querySelector<HTMLSelectElement>(`#${id}`)!;

export function createSettingsPanel(
  initial: SettingsDoc,
  onApply: (doc: SettingsDoc) => void,
): SettingsPanel {
  const element = document.createElement('div');
  element.className = 'settings-panel';
  let current: SettingsDoc = structuredClone(initial);

  const render = () => {
    element.innerHTML = '';
    const title = document.createElement('h3');
    title.textContent = 'Settings';
    element.appendChild(title);

    element.appendChild(
      selectField('Clustering', 'set-algorithm', current.zoom.algorithm, ['kmeans', 'meanshift']),
    );
    element.appendChild(
      numberField('Cluster count (blank = auto)', 'set-k', current.zoom.clusterCount ?? 0),
    );
    current.zoom.levelThresholds.forEach((threshold, index) => {
      element.appendChild(
        numberField(`Level ${index + 1} distance`, `set-threshold-${index}`, threshold, 0.5),
      );
    });
    element.appendChild(
      numberField('Comm hide quantile', 'set-quantile', current.zoom.commHideQuantile, 0.05),
    );
    element.appendChild(
      numberField('Auto-close depth', 'set-close-depth', current.zoom.autoCloseDepth),
    );
    element.appendChild(
      numberField('Mini-map area fraction', 'set-area', current.minimap.areaFraction, 0.005),
    );
    element.appendChild(numberField('Mini-map zoom', 'set-zoom', current.minimap.zoom, 0.5));
    element.appendChild(
      selectField('Marker mode', 'set-marker-mode', current.minimap.markerMode, [
        'camera',
        'target',
      ]),
    );

    const apply = document.createElement('button');
    apply.id = 'set-apply';
    apply.textContent = 'Apply';
    apply.addEventListener('click', () => onApply(panel.readDocument()));
    element.appendChild(apply);
  };

  const panel: SettingsPanel = {
    element,
    setDocument(doc: SettingsDoc): void {
      current = structuredClone(doc);
      render();
    },
    readDocument(): SettingsDoc {
      const doc = structuredClone(current);
      doc.zoom.algorithm = select(element, 'set-algorithm').value as 'kmeans' | 'meanshift';
      const k = Number(input(element, 'set-k').value);
      doc.zoom.clusterCount = k > 0 ? k : null;
      doc.zoom.levelThresholds = doc.zoom.levelThresholds.map((_, index) =>
        Number(input(element, `set-threshold-${index}`).value),
      );
      doc.zoom.commHideQuantile = Number(input(element, 'set-quantile').value);
      doc.zoom.autoCloseDepth = Number(input(element, 'set-close-depth').value);
      doc.minimap.areaFraction = Number(input(element, 'set-area').value);
      doc.minimap.zoom = Number(input(element, 'set-zoom').value);
      doc.minimap.markerMode = select(element, 'set-marker-mode').value as 'camera' | 'target';
      return doc;
    },
  };
  render();
  return panel;
}
