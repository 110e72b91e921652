// Mini-map overlay geometry and click routing.
//
// The overlay is a square scissor region on the main canvas: top-right at
// the configured screen fraction, or centered at 70% of the canvas height
// when enlarged (leaving both side gutters free for other panels). Click
// routing mirrors the server's picking rules: markers first (nearest
// center wins, ties on the lower user id, own marker excluded), then the
// map body, which toggles enlargement.

import type { MarkerInfo, MinimapFrame, MinimapSettings } from './types';

export const VIEWPORT_MARGIN_PX = 8;
export const MARKER_HIT_FRACTION = 0.04;
export const MARKER_HIT_MIN_PX = 8;

export interface OverlayRect {
  x: number;
  y: number;
  size: number;
}

export function anchoredRect(
  canvasWidth: number,
  canvasHeight: number,
  areaFraction: number,
): OverlayRect {
  const size = Math.sqrt(areaFraction * canvasWidth * canvasHeight);
  return { x: canvasWidth - size - VIEWPORT_MARGIN_PX, y: VIEWPORT_MARGIN_PX, size };
}

export function enlargedRect(
  canvasWidth: number,
  canvasHeight: number,
  enlargedFraction: number,
): OverlayRect {
  const size = enlargedFraction * canvasHeight;
  return { x: (canvasWidth - size) / 2, y: (canvasHeight - size) / 2, size };
}

export type MapClick =
  | { kind: 'teleport'; userId: string }
  | { kind: 'toggleEnlarge' }
  | { kind: 'outside' };

export class MinimapController {
  enlarged = false;

  rect(canvasWidth: number, canvasHeight: number, settings: MinimapSettings): OverlayRect {
    return this.enlarged
      ? enlargedRect(canvasWidth, canvasHeight, settings.enlargedFraction)
      : anchoredRect(canvasWidth, canvasHeight, settings.areaFraction);
  }

  handleClick(
    pxX: number,
    pxY: number,
    canvasWidth: number,
    canvasHeight: number,
    settings: MinimapSettings,
    markers: MarkerInfo[],
  ): MapClick {
    const rect = this.rect(canvasWidth, canvasHeight, settings);
    if (pxX < rect.x || pxX > rect.x + rect.size || pxY < rect.y || pxY > rect.y + rect.size) {
      return { kind: 'outside' };
    }
    const u = (pxX - rect.x) / rect.size;
    const v = (pxY - rect.y) / rect.size;
    const radius = Math.max(MARKER_HIT_FRACTION * rect.size, MARKER_HIT_MIN_PX);
    let best: { dist: number; userId: string } | null = null;
    for (const marker of markers) {
      if (marker.isSelf) continue;
      const dist = Math.hypot((u - marker.uv[0]) * rect.size, (v - marker.uv[1]) * rect.size);
      if (dist > radius) continue;
      if (!best || dist < best.dist || (dist === best.dist && marker.userId < best.userId)) {
        best = { dist, userId: marker.userId };
      }
    }
    if (best) return { kind: 'teleport', userId: best.userId };
    this.enlarged = !this.enlarged;
    return { kind: 'toggleEnlarge' };
  }
}

/** World ground position for a uv point of the current frame. */
export function frameUvToWorld(frame: MinimapFrame, u: number, v: number): [number, number] {
  const [cx, cz] = frame.worldCenter;
  const [hx, hz] = frame.halfExtents;
  return [cx - hx + u * 2 * hx, cz + hz - v * 2 * hz];
}
