// Browser entry point: renderer, orbit controls, scissored mini-map pass,
// panels, and the room connection. Everything here is wiring; the logic
// lives in the imported modules so it stays testable without WebGL.

import {
  AmbientLight,
  Color,
  DirectionalLight,
  OrthographicCamera,
  PerspectiveCamera,
  Scene,
  Vector3,
  WebGLRenderer,
} from 'three';
import { OrbitControls } from 'three/examples/jsm/controls/OrbitControls.js';
import { ApiClient } from './api';
import { applyAppearance, buildScene, setLayerVisibility, type SceneHandles } from './cityScene';
import { MinimapController } from './minimapView';
import { RoomConnection } from './socket';
import { createSettingsPanel, type SettingsPanel } from './settingsPanel';
import type { Pose, SettingsDoc } from './types';
import { renderUserList } from './userList';
import { ViewerState } from './viewerState';

const params = new URLSearchParams(window.location.search);
const httpBase = params.get('server') ?? `${window.location.protocol}//${window.location.host}`;
const wsBase = httpBase.replace(/^http/, 'ws');
const roomId = params.get('room') ?? 'lobby';
const landscapeId = params.get('landscape') ?? '';
const userName = params.get('name') ?? `visitor-${Math.floor(Math.random() * 1000)}`;

const canvas = document.getElementById('scene') as HTMLCanvasElement;
const banner = document.getElementById('banner') as HTMLDivElement;
const sidebar = document.getElementById('sidebar') as HTMLDivElement;
const userPanel = document.getElementById('users') as HTMLDivElement;
const popover = document.getElementById('popover') as HTMLDivElement;

const api = new ApiClient(httpBase);
const state = new ViewerState();
const minimap = new MinimapController();

let handles: SceneHandles | null = null;
let settings: SettingsDoc | null = null;
let settingsPanel: SettingsPanel | null = null;

const scene = new Scene();
scene.background = new Color('#dfe7ef');
scene.add(new AmbientLight(0xffffff, 0.7));
const sun = new DirectionalLight(0xffffff, 1.2);
sun.position.set(40, 80, 20);
scene.add(sun);

const camera = new PerspectiveCamera(55, 1, 0.1, 5000);
const mapCamera = new OrthographicCamera(-1, 1, 1, -1, 0.1, 2000);
const renderer = new WebGLRenderer({ canvas, antialias: true });
const controls = new OrbitControls(camera, canvas);

function applyPose(pose: Pose): void {
  camera.position.set(...pose.position);
  controls.target.set(...pose.target);
  controls.update();
}

function currentPose(): Pose {
  return {
    position: [camera.position.x, camera.position.y, camera.position.z],
    target: [controls.target.x, controls.target.y, controls.target.z],
  };
}

applyPose(state.pose);

let connection: RoomConnection | null = null;
let lastSent = 0;
controls.addEventListener('change', () => {
  const now = performance.now();
  if (now - lastSent < 100) return; // server coalesces anyway
  lastSent = now;
  state.pose = currentPose();
  connection?.sendCameraUpdate(state.pose);
});

function refreshUserList(): void {
  renderUserList(userPanel, state.selfId, state.color, state.users, state.spectating, {
    onTeleport: (userId) => {
      const pose = state.teleportTo(userId);
      if (pose) {
        applyPose(pose);
        connection?.sendCameraUpdate(pose);
      }
    },
    onSpectateToggle: (userId) => {
      if (state.spectating === userId) {
        state.spectating = null;
        connection?.sendSpectateStop();
      } else {
        state.spectating = userId;
        connection?.sendSpectateStart(userId);
      }
      refreshUserList();
    },
  });
}

canvas.addEventListener('pointerdown', (event) => {
  if (!settings || !state.frame) return;
  const result = minimap.handleClick(
    event.offsetX,
    event.offsetY,
    canvas.clientWidth,
    canvas.clientHeight,
    settings.minimap,
    state.markers,
  );
  if (result.kind === 'teleport') {
    const pose = state.teleportTo(result.userId);
    if (pose) {
      applyPose(pose);
      connection?.sendCameraUpdate(pose);
    }
  }
});

canvas.addEventListener('pointermove', (event) => {
  // entity hover labels on the enlarged map only
  if (!minimap.enlarged || !settings || !state.frame || !handles) {
    popover.style.display = 'none';
    return;
  }
  const rect = minimap.rect(canvas.clientWidth, canvas.clientHeight, settings.minimap);
  const u = (event.offsetX - rect.x) / rect.size;
  const v = (event.offsetY - rect.y) / rect.size;
  if (u < 0 || u > 1 || v < 0 || v > 1) {
    popover.style.display = 'none';
    return;
  }
  const [cx, cz] = state.frame.worldCenter;
  const [hx, hz] = state.frame.halfExtents;
  const x = cx - hx + u * 2 * hx;
  const z = cz + hz - v * 2 * hz;
  let best: { name: string; depth: number } | null = null;
  for (const box of handles.layout.boxes) {
    if (x >= box.min[0] && x <= box.max[0] && z >= box.min[2] && z <= box.max[2]) {
      if (!best || box.depth > best.depth) {
        best = { name: box.entityId, depth: box.depth };
      }
    }
  }
  if (best) {
    popover.textContent = best.name;
    popover.style.display = 'block';
    popover.style.left = `${event.clientX + 10}px`;
    popover.style.top = `${event.clientY + 10}px`;
  } else {
    popover.style.display = 'none';
  }
});

function fitMapCamera(): void {
  if (!state.frame) return;
  const [cx, cz] = state.frame.worldCenter;
  const [hx, hz] = state.frame.halfExtents;
  mapCamera.left = -hx;
  mapCamera.right = hx;
  mapCamera.top = hz;
  mapCamera.bottom = -hz;
  mapCamera.position.set(cx, 500, cz);
  mapCamera.lookAt(new Vector3(cx, 0, cz));
  mapCamera.updateProjectionMatrix();
}

function renderLoop(): void {
  requestAnimationFrame(renderLoop);
  const width = canvas.clientWidth;
  const height = canvas.clientHeight;
  renderer.setSize(width, height, false);
  camera.aspect = width / height;
  camera.updateProjectionMatrix();

  renderer.setScissorTest(false);
  renderer.setViewport(0, 0, width, height);
  renderer.render(scene, camera);

  if (handles && settings && state.frame) {
    // mini-map pass: scissored square, hidden layers filtered
    const rect = minimap.rect(width, height, settings.minimap);
    const hidden = new Set(settings.minimap.hiddenLayers);
    hidden.add('labels'); // map labels come from the overlay, not sprites
    setLayerVisibility(handles, hidden);
    fitMapCamera();
    renderer.setScissorTest(true);
    const yTop = height - rect.y - rect.size;
    renderer.setScissor(rect.x, yTop, rect.size, rect.size);
    renderer.setViewport(rect.x, yTop, rect.size, rect.size);
    renderer.render(scene, mapCamera);
    renderer.setScissorTest(false);
    setLayerVisibility(handles, new Set());
    drawMarkers(rect);
  }
}

const markerLayer = document.getElementById('markers') as HTMLDivElement;
function drawMarkers(rect: { x: number; y: number; size: number }): void {
  markerLayer.innerHTML = '';
  for (const marker of state.markers) {
    const dot = document.createElement('div');
    dot.className = marker.offMap ? 'marker off-map' : 'marker';
    dot.style.background = marker.color;
    dot.style.left = `${rect.x + marker.uv[0] * rect.size - 5}px`;
    dot.style.top = `${rect.y + marker.uv[1] * rect.size - 5}px`;
    markerLayer.appendChild(dot);
  }
}

async function start(): Promise<void> {
  if (!landscapeId) {
    banner.textContent = 'missing ?landscape=<id> (upload via POST /landscapes first)';
    banner.style.display = 'block';
    return;
  }
  const layout = await api.getLayout(landscapeId);
  settings = await api.getSettings(landscapeId);
  handles = buildScene(layout);
  scene.add(handles.root);

  settingsPanel = createSettingsPanel(settings, async (doc) => {
    settings = await api.putSettings(landscapeId, doc);
    settingsPanel?.setDocument(settings);
    connection?.sendCameraUpdate(currentPose()); // refresh appearance live
  });
  sidebar.appendChild(settingsPanel.element);

  connection = new RoomConnection({
    baseUrl: wsBase,
    roomId,
    name: userName,
    landscapeId,
    screen: [window.innerWidth, window.innerHeight],
    onMessage: (msg) => {
      const sceneDirty = state.handleServerMessage(msg);
      if (sceneDirty && handles) applyAppearance(handles, state.appearance);
      if (msg.type === 'welcome' || msg.type === 'userJoined' || msg.type === 'userLeft') {
        refreshUserList();
      }
    },
    onConnectionChange: (connected) => {
      banner.style.display = connected ? 'none' : 'block';
      banner.textContent = connected ? '' : 'connection lost, reconnecting...';
      if (connected) connection?.requestSync();
    },
  });
  connection.connect();
  renderLoop();
}

start().catch((error) => {
  banner.textContent = String(error);
  banner.style.display = 'block';
});
