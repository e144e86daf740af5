#ifndef UTIL_H
#define UTIL_H
int util_init(int flags);
/* TODO: document the flag bits */
#define UTIL_MAX(a, b) ((a) > (b) ? (a) : (b))
#endif
