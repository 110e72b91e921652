// Connected-user list with teleport and spectate controls.

import type { RemoteUser } from './viewerState';

export interface UserListCallbacks {
  onTeleport: (userId: string) => void;
  onSpectateToggle: (userId: string) => void;
}

export function renderUserList(
  container: HTMLElement,
  selfId: string,
  selfColor: string,
  users: Map<string, RemoteUser>,
  spectating: string | null,
  callbacks: UserListCallbacks,
): void {
  container.innerHTML = '';
  const title = document.createElement('h3');
  title.textContent = `Users (${users.size + 1})`;
  container.appendChild(title);

  const me = document.createElement('div');
  me.className = 'user-row self';
  me.innerHTML = `<span class="dot" style="background:${selfColor}"></span> you (${selfId})`;
  container.appendChild(me);

  for (const [userId, user] of [...users.entries()].sort()) {
    const row = document.createElement('div');
    row.className = 'user-row';
    row.dataset.userId = userId;
    const dot = document.createElement('span');
    dot.className = 'dot';
    dot.style.background = user.color;
    row.appendChild(dot);
    row.appendChild(document.createTextNode(` ${user.name} `));

    const teleport = document.createElement('button');
    teleport.className = 'teleport';
    teleport.textContent = 'go to';
    teleport.addEventListener('click', () => callbacks.onTeleport(userId));
    row.appendChild(teleport);

    const spectate = document.createElement('button');
    spectate.className = 'spectate';
    spectate.textContent = spectating === userId ? 'stop' : 'spectate';
    spectate.addEventListener('click', () => callbacks.onSpectateToggle(userId));
    row.appendChild(spectate);

    container.appendChild(row);
  }
}
