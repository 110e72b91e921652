// Room-facing viewer state: who is connected, their poses, and our own
// camera. Teleport copies the observed pose verbatim; spectating mirrors
// the target's camera on every update.

import type { MarkerInfo, MinimapFrame, Pose, ServerMessage } from './types';
import { AppearanceStore } from './appearance';

export interface RemoteUser {
  name: string;
  color: string;
  pose: Pose;
  spectating: string | null;
}

function clonePose(pose: Pose): Pose {
  return {
    position: [...pose.position] as Pose['position'],
    target: [...pose.target] as Pose['target'],
  };
}

export class ViewerState {
  selfId = '';
  color = '#808080';
  pose: Pose = { position: [0, 60, 120], target: [0, 0, 0] };
  spectating: string | null = null;
  readonly users = new Map<string, RemoteUser>();
  readonly appearance = new AppearanceStore();
  frame: MinimapFrame | null = null;
  markers: MarkerInfo[] = [];
  lastError = '';

  /** Called for every server message; returns true if the scene needs work. */
  handleServerMessage(msg: ServerMessage): boolean {
    switch (msg.type) {
      case 'welcome': {
        this.selfId = msg.selfId;
        this.color = msg.color;
        this.users.clear();
        for (const [uid, entry] of Object.entries(msg.snapshot.users)) {
          if (uid === this.selfId) continue;
          this.users.set(uid, {
            name: entry.name,
            color: entry.color,
            pose: clonePose(entry.pose),
            spectating: entry.spectating,
          });
        }
        return false;
      }
      case 'userJoined':
        this.users.set(msg.userId, {
          name: msg.name,
          color: msg.color,
          pose: { position: [0, 60, 120], target: [0, 0, 0] },
          spectating: null,
        });
        return false;
      case 'userLeft':
        this.users.delete(msg.userId);
        if (this.spectating === msg.userId) this.spectating = null;
        return false;
      case 'cameraUpdate': {
        const sender = msg.userId;
        if (!sender) return false;
        const user = this.users.get(sender);
        if (user) user.pose = clonePose(msg.pose);
        if (this.spectating === sender) {
          this.pose = clonePose(msg.pose);
        }
        return false;
      }
      case 'stateSync': {
        for (const [uid, pose] of Object.entries(msg.poses)) {
          if (uid === this.selfId) continue;
          const user = this.users.get(uid);
          if (user) user.pose = clonePose(pose);
        }
        this.markers = msg.markers;
        return false;
      }
      case 'appearance':
        this.appearance.applyDelta(msg.delta);
        return true;
      case 'minimap':
        this.frame = msg.frame;
        this.markers = msg.markers;
        return false;
      case 'error':
        this.lastError = msg.reason;
        return false;
      default:
        return false;
    }
  }

  /** Adopt another user's exact pose (marker or user-list teleport). */
  teleportTo(userId: string): Pose | null {
    const user = this.users.get(userId);
    if (!user) return null;
    this.pose = clonePose(user.pose);
    return this.pose;
  }
}
