#include <cstdio>

int main() {
    std::puts("veq: CLI not wired up yet");
    return 1;
}
