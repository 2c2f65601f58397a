#include <cstdio>

int main() {
    std::puts("wsd-cli: not wired up yet");
    return 1;
}
