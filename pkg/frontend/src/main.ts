/**
 * CLI: run a detection model over a PPM directory and write the
 * detection stream the annotation pipeline consumes.
 *
 *   node dist/main.js --images DIR --out FILE
 *       [--model builtin:threshold] [--score-floor 0] [--resize none|WxH]
 */

import { exportDetections } from './bridge.js';
import { loadModel } from './model-loader.js';
import { BridgeConfig } from './types.js';

function parseArgs(argv: string[]): BridgeConfig {
  const cfg: BridgeConfig = {
    model: 'builtin:threshold',
    scoreFloor: 0,
    inputDir: '',
    outputPath: '',
    resize: 'none',
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i++;
      if (i >= argv.length) throw new Error(`missing value for ${arg}`);
      return argv[i];
    };
    switch (arg) {
      case '--model':
        cfg.model = next();
        break;
      case '--images':
        cfg.inputDir = next();
        break;
      case '--out':
        cfg.outputPath = next();
        break;
      case '--score-floor':
        cfg.scoreFloor = Number(next());
        break;
      case '--resize':
        cfg.resize = next();
        break;
      case '--help':
        console.log(
          'usage: main.js --images DIR --out FILE [--model ID] [--score-floor F] [--resize none|WxH]\n' +
            '  --model        builtin:threshold[?tolerance=..&minArea=..&border=..]\n' +
            '                 or module:<adapter.js> (default: builtin:threshold)\n' +
            '  --score-floor  drop detections below this score, 0..1 (default: 0)\n' +
            '  --resize       model input size; boxes are de-scaled back (default: none)',
        );
        process.exit(0);
        break;
      default:
        throw new Error(`unknown argument ${arg}`);
    }
  }
  if (!cfg.inputDir || !cfg.outputPath) throw new Error('--images and --out are required');
  if (!(cfg.scoreFloor >= 0 && cfg.scoreFloor <= 1)) {
    throw new Error(`--score-floor must be in [0, 1], got ${cfg.scoreFloor}`);
  }
  return cfg;
}

async function main() {
  const cfg = parseArgs(process.argv.slice(2));
  const model = await loadModel(cfg.model);
  const summary = await exportDetections(cfg, model);
  console.error(
    `bridge: model=${model.name} images=${summary.images} written=${summary.written}` +
      (summary.skipped.length ? ` skipped=${JSON.stringify(summary.skipped)}` : ''),
  );
}

main().catch((err: Error) => {
  console.error(`error: ${err.message}`);
  process.exit(1);
});
