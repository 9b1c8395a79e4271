/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demoparser_free: (a: number, b: number) => void;
export const demoparser_new: (a: number, b: number, c: number) => [number, number, number];
export const demoparser_trace: (a: number, b: number, c: number) => [number, number, number, number];
export const demoparser_training_log: (a: number) => [number, number];
export const dropout_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const sample_trees: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
