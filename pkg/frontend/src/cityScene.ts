// Builds and updates the three.js scene graph from the layout document
// and the appearance store. Pure scene-graph work: no renderer or GL
// context is touched here, so everything is testable headlessly.

import {
  BoxGeometry,
  BufferGeometry,
  CanvasTexture,
  Color,
  Group,
  Line,
  LineBasicMaterial,
  Mesh,
  MeshLambertMaterial,
  QuadraticBezierCurve3,
  Sprite,
  SpriteMaterial,
  Vector3,
} from 'three';
import type { LayoutBox, LayoutDoc, LinkRecord } from './types';
import { AppearanceStore, truncateLabel } from './appearance';

export const LAYER_TAGS = [
  'foundation',
  'districts',
  'buildings',
  'methods',
  'communication',
  'labels',
  'markers',
] as const;
export type LayerTag = (typeof LAYER_TAGS)[number];

const METHOD_COLORS = ['#ef6c00', '#8e24aa', '#00897b', '#c0ca33'];
const CLOSED_PACKAGE_COLOR = '#7a8ba6';
const UNIT_BOX = new BoxGeometry(1, 1, 1);

export interface SceneHandles {
  root: Group;
  layers: Record<LayerTag, Group>;
  entityMeshes: Map<string, Mesh>;
  methodGroups: Map<string, Group>;
  labelSprites: Map<string, Sprite>;
  linkLines: Map<string, Line>;
  layout: LayoutDoc;
}

function boxMesh(box: LayoutBox, color: string): Mesh {
  const mesh = new Mesh(UNIT_BOX, new MeshLambertMaterial({ color: new Color(color) }));
  const size = [0, 1, 2].map((i) => box.max[i] - box.min[i]);
  const center = [0, 1, 2].map((i) => (box.max[i] + box.min[i]) / 2);
  mesh.scale.set(size[0], size[1], size[2]);
  mesh.position.set(center[0], center[1], center[2]);
  mesh.name = box.entityId;
  return mesh;
}

function labelSprite(text: string): Sprite {
  const material = new SpriteMaterial({ depthTest: false });
  const sprite = new Sprite(material);
  sprite.userData.text = text;
  return sprite;
}

/** Render label text into the sprite; no-op where 2D canvas is missing. */
export function paintLabel(sprite: Sprite, text: string): void {
  sprite.userData.renderedText = text;
  if (typeof document === 'undefined') return;
  const canvas = document.createElement('canvas');
  const ctx = canvas.getContext('2d');
  if (!ctx || typeof (ctx as CanvasRenderingContext2D).fillText !== 'function') return;
  canvas.width = 256;
  canvas.height = 64;
  ctx.font = '32px monospace';
  ctx.fillStyle = '#10141c';
  ctx.textAlign = 'center';
  ctx.fillText(text, 128, 42);
  (sprite.material as SpriteMaterial).map = new CanvasTexture(canvas);
  sprite.material.needsUpdate = true;
}

export function buildScene(layout: LayoutDoc): SceneHandles {
  const root = new Group();
  root.name = 'city';
  const layers = Object.fromEntries(
    LAYER_TAGS.map((tag) => {
      const group = new Group();
      group.name = tag;
      root.add(group);
      return [tag, group];
    }),
  ) as Record<LayerTag, Group>;

  const entityMeshes = new Map<string, Mesh>();
  const methodGroups = new Map<string, Group>();
  const labelSprites = new Map<string, Sprite>();
  const palette = layout.config.colorDepthPalette;

  for (const box of layout.boxes) {
    let layer: Group;
    let color: string;
    if (box.kind === 'application') {
      layer = layers.foundation;
      color = '#9e9e9e';
    } else if (box.kind === 'package') {
      layer = layers.districts;
      color = palette[(box.depth - 1) % palette.length];
    } else {
      layer = layers.buildings;
      color = '#30409a';
    }
    const mesh = boxMesh(box, color);
    layer.add(mesh);
    entityMeshes.set(box.entityId, mesh);
    if (box.kind === 'class') {
      const stack = new Group();
      stack.name = `${box.entityId}/methods`;
      layers.methods.add(stack);
      methodGroups.set(box.entityId, stack);
    }
  }

  for (const slot of layout.labels) {
    const sprite = labelSprite(slot.text);
    sprite.position.set(slot.anchor[0], slot.anchor[1] + 0.4, slot.anchor[2]);
    sprite.name = `${slot.entityId}/label`;
    layers.labels.add(sprite);
    labelSprites.set(slot.entityId, sprite);
  }

  return {
    root,
    layers,
    entityMeshes,
    methodGroups,
    labelSprites,
    linkLines: new Map(),
    layout,
  };
}

function rebuildMethodStack(
  handles: SceneHandles,
  entityId: string,
  box: LayoutBox,
  segments: number[],
): void {
  const stack = handles.methodGroups.get(entityId);
  if (!stack) return;
  stack.clear();
  const width = box.max[0] - box.min[0];
  const depthSize = box.max[2] - box.min[2];
  let offset = box.min[1];
  segments.forEach((height, index) => {
    const mesh = new Mesh(
      UNIT_BOX,
      new MeshLambertMaterial({ color: new Color(METHOD_COLORS[index % METHOD_COLORS.length]) }),
    );
    mesh.scale.set(width * 1.02, height, depthSize * 1.02);
    mesh.position.set(
      (box.min[0] + box.max[0]) / 2,
      offset + height / 2,
      (box.min[2] + box.max[2]) / 2,
    );
    offset += height;
    stack.add(mesh);
  });
}

function linkLine(record: LinkRecord, handles: SceneHandles): Line {
  const boxes = new Map(handles.layout.boxes.map((b) => [b.entityId, b]));
  const src = boxes.get(record.sourceId);
  const tgt = boxes.get(record.targetId);
  const start = src
    ? new Vector3((src.min[0] + src.max[0]) / 2, src.max[1], (src.min[2] + src.max[2]) / 2)
    : new Vector3();
  const end = tgt
    ? new Vector3((tgt.min[0] + tgt.max[0]) / 2, tgt.max[1], (tgt.min[2] + tgt.max[2]) / 2)
    : new Vector3();
  const distance = start.distanceTo(end);
  const apex = record.curvatureFactor * 0.3 * distance;
  const control = start.clone().add(end).multiplyScalar(0.5);
  control.y += 2 * apex;
  const curve = new QuadraticBezierCurve3(start, control, end);
  const geometry = new BufferGeometry().setFromPoints(curve.getPoints(16));
  const line = new Line(geometry, new LineBasicMaterial({ color: new Color('#e6c229') }));
  line.userData.record = record;
  return line;
}

/** Sync the scene graph with the appearance store after a delta. */
export function applyAppearance(handles: SceneHandles, store: AppearanceStore): void {
  const dirty = store.takeDirty();
  const boxes = new Map(handles.layout.boxes.map((b) => [b.entityId, b]));
  const labelsByEntity = new Map(handles.layout.labels.map((l) => [l.entityId, l]));

  for (const entityId of dirty.entities) {
    const appearance = store.entity(entityId);
    const mesh = handles.entityMeshes.get(entityId);
    const box = boxes.get(entityId);
    if (!mesh || !box) continue;
    mesh.visible = !appearance.hidden;
    if (box.kind === 'package') {
      const palette = handles.layout.config.colorDepthPalette;
      const color = appearance.packageOpen
        ? palette[(box.depth - 1) % palette.length]
        : CLOSED_PACKAGE_COLOR;
      (mesh.material as MeshLambertMaterial).color = new Color(color);
    }
    if (box.kind === 'class') {
      const baseHeight = box.max[1] - box.min[1];
      const height = baseHeight * appearance.classHeightScale;
      mesh.scale.y = height;
      mesh.position.y = box.min[1] + height / 2;
      rebuildMethodStack(
        handles,
        entityId,
        box,
        appearance.methodsVisible && !appearance.hidden ? appearance.methodSegments : [],
      );
    }
    const sprite = handles.labelSprites.get(entityId);
    const slot = labelsByEntity.get(entityId);
    if (sprite && slot) {
      sprite.visible = !appearance.hidden;
      const scale = appearance.labelFontScale;
      sprite.scale.set(2.4 * scale, 0.6 * scale, 1);
      paintLabel(sprite, truncateLabel(slot.text, appearance.labelMaxChars));
    }
  }

  if (dirty.links) {
    const layer = handles.layers.communication;
    layer.clear();
    handles.linkLines.clear();
    for (const [linkId, record] of store.links) {
      if (!record.visible) continue;
      const line = linkLine(record, handles);
      line.name = linkId;
      layer.add(line);
      handles.linkLines.set(linkId, line);
    }
  }
}

/** Apply the settings' hidden layer set, e.g. before a mini-map pass. */
export function setLayerVisibility(handles: SceneHandles, hidden: Set<string>): void {
  for (const tag of LAYER_TAGS) {
    handles.layers[tag].visible = !hidden.has(tag);
  }
}
