// Thin HTTP client for the landscape endpoints.

import type { LayoutDoc, SettingsDoc } from './types';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async uploadSpans(jsonl: string): Promise<{ landscapeId: string }> {
    const response = await this.fetchImpl(`${this.baseUrl}/landscapes`, {
      method: 'POST',
      headers: { 'content-type': 'application/x-ndjson' },
      body: jsonl,
    });
    if (!response.ok) throw new Error(`upload failed: ${response.status}`);
    return response.json();
  }

  async getLayout(landscapeId: string): Promise<LayoutDoc> {
    const response = await this.fetchImpl(`${this.baseUrl}/landscapes/${landscapeId}/layout`);
    if (!response.ok) throw new Error(`layout fetch failed: ${response.status}`);
    return response.json();
  }

  async getSettings(landscapeId: string): Promise<SettingsDoc> {
    const response = await this.fetchImpl(`${this.baseUrl}/landscapes/${landscapeId}/settings`);
    if (!response.ok) throw new Error(`settings fetch failed: ${response.status}`);
    return response.json();
  }

  async putSettings(landscapeId: string, settings: SettingsDoc): Promise<SettingsDoc> {
    const response = await this.fetchImpl(`${this.baseUrl}/landscapes/${landscapeId}/settings`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(settings),
    });
    if (!response.ok) throw new Error(`settings update failed: ${response.status}`);
    return response.json();
  }
}
