import { describe, expect, it } from 'vitest';
import { createSettingsPanel } from '../src/settingsPanel';
import { renderUserList } from '../src/userList';
import type { SettingsDoc } from '../src/types';
import type { RemoteUser } from '../src/viewerState';

const defaults: SettingsDoc = {
  zoom: {
    algorithm: 'kmeans',
    clusterCount: null,
    bandwidth: 25,
    levelThresholds: [25, 60, 120, 250],
    seed: 7,
    featureFlags: {},
    commHideQuantile: 0.5,
    autoCloseDepth: 1,
  },
  minimap: {
    areaFraction: 0.04,
    corner: 'top-right',
    zoom: 1,
    markerMode: 'camera',
    hiddenLayers: [],
    enlargedFraction: 0.7,
  },
};

describe('settings panel', () => {
  it('edits settings and applies the new document', () => {
    let applied: SettingsDoc | null = null;
    const panel = createSettingsPanel(defaults, (doc) => (applied = doc));
    document.body.appendChild(panel.element);

    (panel.element.querySelector('#set-marker-mode') as HTMLSelectElement).value = 'target';
    (panel.element.querySelector('#set-threshold-0') as HTMLInputElement).value = '30';
    (panel.element.querySelector('#set-k') as HTMLInputElement).value = '12';
    (panel.element.querySelector('#set-apply') as HTMLButtonElement).click();

    expect(applied).not.toBeNull();
    expect(applied!.minimap.markerMode).toBe('target');
    expect(applied!.zoom.levelThresholds[0]).toBe(30);
    expect(applied!.zoom.clusterCount).toBe(12);
    document.body.removeChild(panel.element);
  });

  it('round-trips a server-confirmed document', () => {
    const panel = createSettingsPanel(defaults, () => {});
    const confirmed = structuredClone(defaults);
    confirmed.minimap.zoom = 4;
    panel.setDocument(confirmed);
    expect(panel.readDocument().minimap.zoom).toBe(4);
  });
});

describe('user list', () => {
  it('renders peers with working teleport and spectate buttons', () => {
    const container = document.createElement('div');
    const users = new Map<string, RemoteUser>([
      ['u2', { name: 'kay', color: '#3cb44b', pose: { position: [1, 2, 3], target: [0, 0, 0] }, spectating: null }],
    ]);
    const teleports: string[] = [];
    const spectates: string[] = [];
    renderUserList(container, 'u1', '#808080', users, null, {
      onTeleport: (uid) => teleports.push(uid),
      onSpectateToggle: (uid) => spectates.push(uid),
    });
    expect(container.querySelectorAll('.user-row')).toHaveLength(2); // self + one peer
    (container.querySelector('[data-user-id="u2"] .teleport') as HTMLButtonElement).click();
    (container.querySelector('[data-user-id="u2"] .spectate') as HTMLButtonElement).click();
    expect(teleports).toEqual(['u2']);
    expect(spectates).toEqual(['u2']);
  });
});
