/**
 * Model resolution. Identifiers:
 *
 *   builtin:threshold[?tolerance=40&minArea=64&border=8]
 *       the built-in reference model, no downloads needed
 *   module:<path-to-js>[?key=value...]
 *       dynamic import of an adapter wrapping any real detector
 *       (tfjs, onnx, a REST endpoint, ...); the module must export
 *       `createModel(params)` returning a DetectionModel
 */

import { pathToFileURL } from 'node:url';
import { resolve } from 'node:path';
import { DetectionModel, ModelFactory } from './types.js';
import { createThresholdModel } from './threshold-model.js';

function parseIdentifier(id: string): { scheme: string; target: string; params: Record<string, string> } {
  const colon = id.indexOf(':');
  if (colon < 0) throw new Error(`bad model identifier ${id} (expected scheme:target)`);
  const scheme = id.slice(0, colon);
  let target = id.slice(colon + 1);
  const params: Record<string, string> = {};
  const q = target.indexOf('?');
  if (q >= 0) {
    for (const pair of target.slice(q + 1).split('&')) {
      if (!pair) continue;
      const eq = pair.indexOf('=');
      if (eq < 0) throw new Error(`bad model parameter ${pair}`);
      params[pair.slice(0, eq)] = pair.slice(eq + 1);
    }
    target = target.slice(0, q);
  }
  return { scheme, target, params };
}

export async function loadModel(identifier: string): Promise<DetectionModel> {
  const { scheme, target, params } = parseIdentifier(identifier);

  if (scheme === 'builtin') {
    if (target !== 'threshold') throw new Error(`unknown builtin model ${target}`);
    return createThresholdModel(params);
  }

  if (scheme === 'module') {
    const url = pathToFileURL(resolve(target)).href;
    let mod: { createModel?: ModelFactory };
    try {
      mod = await import(url);
    } catch (err) {
      throw new Error(`cannot load model module ${target}: ${(err as Error).message}`);
    }
    if (typeof mod.createModel !== 'function') {
      throw new Error(`model module ${target} does not export createModel(params)`);
    }
    return mod.createModel(params);
  }

  throw new Error(`unknown model scheme ${scheme} (expected builtin: or module:)`);
}
