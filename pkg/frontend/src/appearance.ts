// Client-side appearance store. The viewer never computes levels itself:
// it starts from a neutral baseline and applies server deltas verbatim.

import type { AppearanceDelta, EntityPatch, LinkRecord } from './types';

export interface EntityAppearance {
  level: number;
  hidden: boolean;
  labelFontScale: number;
  labelMaxChars: number;
  classHeightScale: number;
  methodsVisible: boolean;
  packageOpen: boolean;
  methodSegments: number[];
}

function neutral(): EntityAppearance {
  return {
    level: 0,
    hidden: false,
    labelFontScale: 1,
    labelMaxChars: 1_000_000,
    classHeightScale: 1,
    methodsVisible: false,
    packageOpen: true,
    methodSegments: [],
  };
}

export class AppearanceStore {
  readonly entities = new Map<string, EntityAppearance>();
  readonly links = new Map<string, LinkRecord>();
  closedPackages = new Set<string>();
  private dirtyEntities = new Set<string>();
  private linksDirty = false;

  entity(id: string): EntityAppearance {
    let found = this.entities.get(id);
    if (!found) {
      found = neutral();
      this.entities.set(id, found);
    }
    return found;
  }

  applyDelta(delta: AppearanceDelta): void {
    if (delta.full) {
      this.entities.clear();
      this.links.clear();
      this.closedPackages.clear();
      this.linksDirty = true;
    }
    for (const [id, patch] of Object.entries(delta.entities)) {
      const entry = this.entity(id);
      applyPatch(entry, patch);
      this.dirtyEntities.add(id);
    }
    for (const id of delta.linksRemoved) {
      this.links.delete(id);
      this.linksDirty = true;
    }
    for (const [id, record] of Object.entries(delta.linksUpsert)) {
      this.links.set(id, record);
      this.linksDirty = true;
    }
    if (delta.closedPackages !== undefined) {
      this.closedPackages = new Set(delta.closedPackages);
    }
  }

  /** Entities changed since the last call; used for incremental scene updates. */
  takeDirty(): { entities: Set<string>; links: boolean } {
    const result = { entities: this.dirtyEntities, links: this.linksDirty };
    this.dirtyEntities = new Set();
    this.linksDirty = false;
    return result;
  }
}

function applyPatch(entry: EntityAppearance, patch: EntityPatch): void {
  if (patch.level !== undefined) entry.level = patch.level;
  if (patch.hidden !== undefined) entry.hidden = patch.hidden;
  if (patch.labelFontScale !== undefined) entry.labelFontScale = patch.labelFontScale;
  if (patch.labelMaxChars !== undefined) entry.labelMaxChars = patch.labelMaxChars;
  if (patch.classHeightScale !== undefined) entry.classHeightScale = patch.classHeightScale;
  if (patch.methodsVisible !== undefined) entry.methodsVisible = patch.methodsVisible;
  if (patch.packageOpen !== undefined) entry.packageOpen = patch.packageOpen;
  if (patch.methodSegments !== undefined) entry.methodSegments = [...patch.methodSegments];
}

/** Keep a prefix and add an ellipsis once the text exceeds its budget. */
export function truncateLabel(text: string, maxChars: number): string {
  if (text.length <= maxChars) return text;
  if (maxChars <= 1) return '…';
  return text.slice(0, maxChars - 1) + '…';
}
