#include <cstdio>
int main() { std::puts("maent: not wired up yet"); return 1; }
