import { describe, expect, it } from 'vitest';
import { MinimapController, anchoredRect, enlargedRect } from '../src/minimapView';
import type { MarkerInfo, MinimapSettings } from '../src/types';
import { fixture } from './fixtures';

const settings: MinimapSettings = {
  areaFraction: 0.04,
  corner: 'top-right',
  zoom: 1,
  markerMode: 'camera',
  hiddenLayers: [],
  enlargedFraction: 0.7,
};

describe('overlay geometry', () => {
  it('anchors top-right at the configured area fraction', () => {
    const rect = anchoredRect(1920, 1080, 0.04);
    expect(rect.size).toBeCloseTo(288, 6);
    expect(rect.x).toBeCloseTo(1920 - 288 - 8, 6);
    expect(rect.y).toBe(8);
    const ratio = (rect.size * rect.size) / (1920 * 1080);
    expect(ratio).toBeGreaterThanOrEqual(0.035);
    expect(ratio).toBeLessThanOrEqual(0.045);
  });

  it('matches the server-computed viewport for the fixture', () => {
    const rect = anchoredRect(1920, 1080, settings.areaFraction);
    expect(rect.size).toBeCloseTo(fixture.frame.viewport.width, 6);
    expect(rect.x).toBeCloseTo(fixture.frame.viewport.x, 6);
    expect(rect.y).toBeCloseTo(fixture.frame.viewport.y, 6);
  });

  it('enlarged mode fills 70% of the height, centered with side gutters', () => {
    const rect = enlargedRect(1920, 1080, 0.7);
    expect(rect.size).toBeCloseTo(756, 6);
    expect(rect.x).toBeCloseTo((1920 - 756) / 2, 6);
    expect(rect.x).toBeGreaterThan(0); // gutters stay free for panels
  });
});

describe('MinimapController clicks', () => {
  const markers: MarkerInfo[] = [
    { userId: 'u1', color: '#808080', world: [0, 0], uv: [0.5, 0.5], offMap: false, isSelf: true },
    { userId: 'u2', color: '#3cb44b', world: [3, 4], uv: [0.25, 0.25], offMap: false, isSelf: false },
    { userId: 'u3', color: '#ffe119', world: [9, 9], uv: [0.8, 0.8], offMap: false, isSelf: false },
  ];

  function clickAtUv(controller: MinimapController, u: number, v: number) {
    const rect = controller.rect(1920, 1080, settings);
    return controller.handleClick(
      rect.x + u * rect.size,
      rect.y + v * rect.size,
      1920,
      1080,
      settings,
      markers,
    );
  }

  it('marker click requests a teleport to that user', () => {
    const controller = new MinimapController();
    expect(clickAtUv(controller, 0.25, 0.25)).toEqual({ kind: 'teleport', userId: 'u2' });
    expect(controller.enlarged).toBe(false); // no enlargement on marker hits
  });

  it('own marker is not a teleport target', () => {
    const controller = new MinimapController();
    const result = clickAtUv(controller, 0.5, 0.5);
    expect(result).toEqual({ kind: 'toggleEnlarge' });
  });

  it('map-body click toggles enlargement both ways', () => {
    const controller = new MinimapController();
    expect(clickAtUv(controller, 0.6, 0.1)).toEqual({ kind: 'toggleEnlarge' });
    expect(controller.enlarged).toBe(true);
    expect(controller.rect(1920, 1080, settings).size).toBeCloseTo(756, 6);
    expect(clickAtUv(controller, 0.6, 0.1)).toEqual({ kind: 'toggleEnlarge' });
    expect(controller.enlarged).toBe(false);
  });

  it('clicks outside the overlay are ignored', () => {
    const controller = new MinimapController();
    expect(controller.handleClick(10, 900, 1920, 1080, settings, markers)).toEqual({
      kind: 'outside',
    });
    expect(controller.enlarged).toBe(false);
  });

  it('nearest marker wins, ties break on the lower user id', () => {
    const controller = new MinimapController();
    const rect = controller.rect(1920, 1080, settings);
    // 0.02 uv = ~5.8px offsets, both inside the ~11.5px hit radius
    const pair: MarkerInfo[] = [
      { userId: 'zed', color: '#111', world: [0, 0], uv: [0.48, 0.5], offMap: false, isSelf: false },
      { userId: 'ann', color: '#222', world: [0, 0], uv: [0.52, 0.5], offMap: false, isSelf: false },
    ];
    const equidistant = controller.handleClick(
      rect.x + 0.5 * rect.size, rect.y + 0.5 * rect.size, 1920, 1080, settings, pair,
    );
    expect(equidistant).toEqual({ kind: 'teleport', userId: 'ann' });
    const nearer = controller.handleClick(
      rect.x + 0.49 * rect.size, rect.y + 0.5 * rect.size, 1920, 1080, settings, pair,
    );
    expect(nearer).toEqual({ kind: 'teleport', userId: 'zed' });
  });
});
