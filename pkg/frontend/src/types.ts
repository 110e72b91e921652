// Wire types for the cityviz HTTP and WebSocket APIs.

export type Vec3 = [number, number, number];
export type Vec2 = [number, number];

export interface Pose {
  position: Vec3;
  target: Vec3;
}

export interface LayoutBox {
  entityId: string;
  kind: 'application' | 'package' | 'class';
  min: Vec3;
  max: Vec3;
  depth: number;
}

export interface LabelSlot {
  entityId: string;
  text: string;
  anchor: Vec3;
  maxWidth: number;
  orientation: string;
}

export interface ArcGeometry {
  linkId: string;
  start: Vec3;
  end: Vec3;
  apexHeight: number;
  polyline: Vec3[];
}

export interface LayoutConfigDoc {
  margin: number;
  classFootprint: number;
  baseClassHeight: number;
  packageHeightStep: number;
  foundationGap: number;
  colorDepthPalette: string[];
}

export interface LayoutDoc {
  landscapeId?: string;
  boxes: LayoutBox[];
  labels: LabelSlot[];
  arcs: ArcGeometry[];
  config: LayoutConfigDoc;
}

export interface EntityPatch {
  level?: number;
  hidden?: boolean;
  labelFontScale?: number;
  labelMaxChars?: number;
  classHeightScale?: number;
  methodsVisible?: boolean;
  packageOpen?: boolean;
  methodSegments?: number[];
}

export interface LinkRecord {
  sourceId: string;
  targetId: string;
  requestCount: number;
  level: number;
  thicknessScale: number;
  curvatureFactor: number;
  visible: boolean;
  arrowsVisible: boolean;
}

export interface AppearanceDelta {
  full: boolean;
  entities: Record<string, EntityPatch>;
  linksUpsert: Record<string, LinkRecord>;
  linksRemoved: string[];
  closedPackages?: string[];
}

export interface ViewportRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface MinimapFrame {
  worldCenter: Vec2;
  halfExtents: Vec2;
  viewport: ViewportRect;
  enlarged: boolean;
}

export interface MarkerInfo {
  userId: string;
  color: string;
  world: Vec2;
  uv: Vec2;
  offMap: boolean;
  isSelf: boolean;
}

export interface ZoomSettings {
  algorithm: 'kmeans' | 'meanshift';
  clusterCount: number | null;
  bandwidth: number;
  levelThresholds: number[];
  seed: number;
  featureFlags: Record<string, boolean>;
  commHideQuantile: number;
  autoCloseDepth: number;
}

export interface MinimapSettings {
  areaFraction: number;
  corner: string;
  zoom: number;
  markerMode: 'camera' | 'target';
  hiddenLayers: string[];
  enlargedFraction: number;
}

export interface SettingsDoc {
  zoom: ZoomSettings;
  minimap: MinimapSettings;
}

export interface UserEntry {
  name: string;
  color: string;
  pose: Pose;
  highlights: Record<string, string>;
  spectating: string | null;
}

export interface RoomSnapshot {
  roomId: string;
  landscapeId: string | null;
  users: Record<string, UserEntry>;
}

// Server -> client messages (discriminated by `type`).
export type ServerMessage =
  | { type: 'welcome'; roomId: string; seq: number; selfId: string; color: string; snapshot: RoomSnapshot }
  | { type: 'userJoined'; roomId: string; seq: number; userId: string; name: string; color: string }
  | { type: 'userLeft'; roomId: string; seq: number; userId: string }
  | { type: 'cameraUpdate'; roomId: string; seq: number; pose: Pose; userId?: string }
  | { type: 'highlight'; roomId: string; seq: number; entityId: string; color: string | null; userId?: string }
  | { type: 'spectateStart'; roomId: string; seq: number; targetId: string; userId?: string }
  | { type: 'spectateStop'; roomId: string; seq: number; userId?: string }
  | { type: 'stateSync'; roomId: string; seq: number; poses: Record<string, Pose>; highlights: Record<string, Record<string, string>>; markers: MarkerInfo[] }
  | { type: 'appearance'; roomId: string; seq: number; delta: AppearanceDelta }
  | { type: 'minimap'; roomId: string; seq: number; frame: MinimapFrame; markers: MarkerInfo[] }
  | { type: 'error'; roomId: string; seq: number; reason: string }
  | { type: 'ping'; roomId: string; seq: number }
  | { type: 'pong'; roomId: string; seq: number };
