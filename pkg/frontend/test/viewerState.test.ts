import { describe, expect, it } from 'vitest';
import { ViewerState } from '../src/viewerState';
import type { Pose, RoomSnapshot, ServerMessage } from '../src/types';

const pose = (x: number): Pose => ({ position: [x, 50, 12.25], target: [0, 0, 0] });

function welcome(selfId: string, users: Record<string, { color: string; pose: Pose }>): ServerMessage {
  const snapshot: RoomSnapshot = {
    roomId: 'r',
    landscapeId: 'ls0001',
    users: Object.fromEntries(
      Object.entries(users).map(([uid, u]) => [
        uid,
        { name: uid, color: u.color, pose: u.pose, highlights: {}, spectating: null },
      ]),
    ),
  };
  return { type: 'welcome', roomId: 'r', seq: 1, selfId, color: '#808080', snapshot };
}

describe('ViewerState', () => {
  it('joins a room: welcome snapshot populates self and peers', () => {
    const state = new ViewerState();
    state.handleServerMessage(
      welcome('u1', { u1: { color: '#e6194b', pose: pose(0) }, u2: { color: '#3cb44b', pose: pose(9) } }),
    );
    expect(state.selfId).toBe('u1');
    expect([...state.users.keys()]).toEqual(['u2']);
    expect(state.users.get('u2')!.pose.position[0]).toBe(9);
  });

  it('teleport adopts the exact observed pose', () => {
    const state = new ViewerState();
    state.handleServerMessage(
      welcome('u1', { u1: { color: '#e6194b', pose: pose(0) }, u2: { color: '#3cb44b', pose: pose(3) } }),
    );
    const exotic: Pose = { position: [0.1 + 0.2, Math.PI, -1.0000000001], target: [1e-17, 2.5, 0] };
    state.handleServerMessage({ type: 'cameraUpdate', roomId: 'r', seq: 2, pose: exotic, userId: 'u2' });
    const adopted = state.teleportTo('u2');
    expect(adopted).not.toBeNull();
    expect(state.pose.position).toEqual(exotic.position);
    expect(state.pose.target).toEqual(exotic.target);
    // a copy, not a reference
    expect(state.pose).not.toBe(state.users.get('u2')!.pose);
  });

  it('spectating mirrors every followed camera update', () => {
    const state = new ViewerState();
    state.handleServerMessage(
      welcome('u1', { u1: { color: '#e6194b', pose: pose(0) }, u2: { color: '#3cb44b', pose: pose(3) } }),
    );
    state.spectating = 'u2';
    for (const x of [5, 6, 7]) {
      state.handleServerMessage({ type: 'cameraUpdate', roomId: 'r', seq: x, pose: pose(x), userId: 'u2' });
      expect(state.pose.position[0]).toBe(x);
    }
    state.spectating = null;
    state.handleServerMessage({ type: 'cameraUpdate', roomId: 'r', seq: 9, pose: pose(99), userId: 'u2' });
    expect(state.pose.position[0]).toBe(7); // no longer following
  });

  it('appearance deltas flow into the store and flag the scene dirty', () => {
    const state = new ViewerState();
    const dirty = state.handleServerMessage({
      type: 'appearance',
      roomId: 'r',
      seq: 1,
      delta: {
        full: true,
        entities: { 'cls:a.B': { level: 2, methodsVisible: false } },
        linksUpsert: {},
        linksRemoved: [],
        closedPackages: [],
      },
    });
    expect(dirty).toBe(true);
    expect(state.appearance.entity('cls:a.B').level).toBe(2);
  });

  it('minimap messages update frame and markers', () => {
    const state = new ViewerState();
    const dirty = state.handleServerMessage({
      type: 'minimap',
      roomId: 'r',
      seq: 1,
      frame: {
        worldCenter: [1, 2], halfExtents: [10, 10],
        viewport: { x: 1624, y: 8, width: 288, height: 288 }, enlarged: false,
      },
      markers: [{ userId: 'u1', color: '#808080', world: [1, 2], uv: [0.5, 0.5], offMap: false, isSelf: true }],
    });
    expect(dirty).toBe(false);
    expect(state.frame!.viewport.width).toBe(288);
    expect(state.markers).toHaveLength(1);
  });

  it('user join and leave maintain the peer map', () => {
    const state = new ViewerState();
    state.handleServerMessage(welcome('u1', { u1: { color: '#e6194b', pose: pose(0) } }));
    state.handleServerMessage({ type: 'userJoined', roomId: 'r', seq: 2, userId: 'u2', name: 'kay', color: '#3cb44b' });
    expect(state.users.has('u2')).toBe(true);
    state.spectating = 'u2';
    state.handleServerMessage({ type: 'userLeft', roomId: 'r', seq: 3, userId: 'u2' });
    expect(state.users.has('u2')).toBe(false);
    expect(state.spectating).toBeNull();
  });
});
