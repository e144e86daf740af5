#include "util.h"

static int scale = 2;

int g(int x)
{
    int y = x * scale;

    return y + undefined_name;
}

int f(int x)
{
    return g(x) + 1
}
