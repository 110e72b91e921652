import raw from './fixtures/sixServices.json';
import type { AppearanceDelta, LayoutDoc, MarkerInfo, MinimapFrame } from '../src/types';

export interface Fixture {
  layout: LayoutDoc;
  fullDelta: AppearanceDelta;
  incrementalDelta: AppearanceDelta;
  frame: MinimapFrame;
  markers: MarkerInfo[];
}

export const fixture = raw as unknown as Fixture;
