/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const connectivity: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const exact_entropy: (a: number, b: number, c: number) => [number, number, number, number];
export const rdm_check: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
