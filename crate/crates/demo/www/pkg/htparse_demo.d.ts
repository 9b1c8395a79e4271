/* tslint:disable */
/* eslint-disable */

export class DemoParser {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Trains on `sentences` generated sentences for `epochs` epochs.
     */
    constructor(sentences: number, epochs: number, seed: number);
    trace(text: string): string;
    training_log(): string;
}

export function dropout_curve(alpha: number, max_count: number, draws: number, seed: number): string;

export function sample_trees(count: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demoparser_free: (a: number, b: number) => void;
    readonly demoparser_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demoparser_trace: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demoparser_training_log: (a: number) => [number, number];
    readonly dropout_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sample_trees: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
